import numpy as np
import pytest

from ftqlab.compiler import (
    CompileError,
    MoveGate,
    PrimOp,
    apply_movement,
    assign_registers,
    compile_circuit,
    decompose_swap,
    identity_tokens,
    rot_budget,
    serialize,
    swap11_budget,
    verify_equivalence_statevector,
    verify_equivalence_tableau,
)


def random_clifford_layer(W, rng):
    qubits = list(range(W))
    rng.shuffle(qubits)
    layer = []
    i = 0
    while i < len(qubits):
        r = rng.integers(0, 4)
        if r >= 2 and i + 1 < len(qubits):
            name = "CNOT" if r == 2 else "CZ"
            layer.append((name, (qubits[i], qubits[i + 1])))
            i += 2
        elif r == 1:
            layer.append(("S", (qubits[i],)))
            i += 1
        else:
            layer.append(("H", (qubits[i],)))
            i += 1
    return layer


def test_assign_single_three_qubit_gate():
    a = assign_registers([("CCZ", (0, 1, 2))], W=3, m=2, k=12)
    assert a.phi[0] == (1, 1) and a.phi[1] == (1, 2) and a.phi[2] == (1, 3)


def test_assign_rejects_small_k():
    with pytest.raises(CompileError):
        assign_registers([], W=4, m=2, k=8)


def test_assign_register_budget():
    # W=24, all 2-qubit gates, k=12: at most ceil(4W/k) = 8 registers used
    layer = [("CNOT", (2 * i, 2 * i + 1)) for i in range(12)]
    a = assign_registers(layer, W=24, m=8, k=12)
    used = {r for (r, p) in [a.phi[q] for q in range(24)]}
    assert len(used) <= 8


def test_assign_empty_layer():
    a = assign_registers([], W=5, m=2, k=12)
    assert len(set(a.phi.values())) == 5


def test_serialize_budgets():
    # full conflict pattern on m=4 registers, k=16
    gates = [MoveGate((a, b), a, b, 1, 2) for a in range(1, 5) for b in range(a + 1, 5)]
    steps, colors = serialize(gates, m=4, k=16, alpha=1)
    assert colors <= 2 * 16
    for step in steps:
        regs = [r for g in step for r in g.regs]
        assert len(regs) == len(set(regs))
        assert len(step) <= 4


def test_serialize_alpha_full():
    gates = [MoveGate((r,), r, r, 1, 1) for r in range(1, 5)]
    steps, _ = serialize(gates, m=4, k=16, alpha=4)
    for step in steps:
        assert len(step) <= 1


def test_swap_identity_case():
    assert decompose_swap(3, 3, 16, 0, 0, scratch=1) == []


def test_swap_cross_register_exhaustive_k16():
    k = 16
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            ops = decompose_swap(i, j, k, 0, 1)
            assert rot_budget(ops) <= 4 * 4
            assert swap11_budget(ops) == 1
            where = apply_movement(ops, identity_tokens([0, 1], k))
            got = {tok: pos for pos, tok in where.items()}
            for p in range(1, k + 1):
                for r in (0, 1):
                    want = (r, p)
                    if (r, p) == (0, i):
                        want = (1, j)
                    elif (r, p) == (1, j):
                        want = (0, i)
                    assert got[(r, p)] == want


def test_swap_same_register_exhaustive_k16():
    k = 16
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            ops = decompose_swap(i, j, k, 0, 0, scratch=1)
            if i != j:
                assert rot_budget(ops) <= 4 * 4
                assert swap11_budget(ops) == 3
            where = apply_movement(ops, identity_tokens([0, 1], k))
            got = {tok: pos for pos, tok in where.items()}
            for p in range(1, k + 1):
                want = (0, p)
                if p == i:
                    want = (0, j)
                elif p == j:
                    want = (0, i)
                assert got[(0, p)] == want
                assert got[(1, p)] == (1, p)  # scratch state preserved


def test_rot_composition_exhaustive_k32():
    k = 32
    for a in range(k):
        for b in range(k):
            ops = []
            if a:
                ops.append(PrimOp("ROT", (0,), amount=a))
            if b:
                ops.append(PrimOp("ROT", (0,), amount=b))
            where = apply_movement(ops, identity_tokens([0], k))
            got = {tok: pos for pos, tok in where.items()}
            for p in range(1, k + 1):
                assert got[(0, p)] == (0, (p - 1 + a + b) % k + 1)


def test_compile_identity_circuit():
    circ = [[("H", (0,))], [("H", (0,))]]
    comp = compile_circuit(circ, W=4, k=16)
    rep = comp.report()
    assert rep["one_serialized"] and rep["mono_typed"]
    assert verify_equivalence_tableau(circ, comp, trials=3, seed=0)


def test_compile_random_clifford_circuits():
    rng = np.random.default_rng(1)
    for trial in range(4):
        circ = [random_clifford_layer(6, rng) for _ in range(5)]
        comp = compile_circuit(circ, W=6, k=16)
        rep = comp.report()
        assert rep["one_serialized"] and rep["mono_typed"]
        assert all(c <= 2 * 16 for c in rep["colors"])
        assert verify_equivalence_tableau(circ, comp, trials=5, seed=trial)


def test_compile_ccz_layer_structure():
    circ = [[("CCZ", (0, 1, 2))]]
    comp = compile_circuit(circ, W=6, k=16)
    ccz_layers = [l for l in comp.prim.layers if l[0].kind == "CCZ"]
    assert len(ccz_layers) == 1 and len(ccz_layers[0]) == 1


def test_compile_ccz_statevector():
    circ = [
        [("H", (0,)), ("H", (1,)), ("H", (3,))],
        [("CCZ", (0, 1, 2))],
        [("CNOT", (2, 3))],
        [("CCZ", (3, 4, 5))],
    ]
    comp = compile_circuit(circ, W=6, k=16)
    fid = verify_equivalence_statevector(circ, comp, seed=3)
    assert fid >= 1 - 1e-10


def test_compile_rejects_bad_k():
    with pytest.raises(CompileError):
        compile_circuit([[("H", (0,))]], W=2, k=12)  # not a power of two


def test_depth_ratio_reported():
    rng = np.random.default_rng(5)
    circ = [random_clifford_layer(6, rng) for _ in range(5)]
    comp = compile_circuit(circ, W=6, k=16)
    rep = comp.report()
    assert rep["ratio"] > 0
    assert rep["ratio_over_klogk"] > 0
