"""Register compilation: bin-packed assignment, edge-coloring serialization,
ROT/SWAP decomposition, and the full pipeline onto the primitive gate set.

Registers hold k = 2^nu qubits at 1-based positions.  Permutation-state
consumption is modeled semantically: ROT and SWAP(1,1) primitives act as
relabelings verified by a token oracle, and each decomposed SWAP block
is an involution, so un-aligning a gate support replays its blocks in
reverse order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pauli import StabilizerTableau, stab_group_equal


class CompileError(Exception):
    pass


PRIMITIVE_COMPUTE = {"H", "S", "MZ", "CNOT", "CCZ", "X", "Y", "Z"}


@dataclass(frozen=True)
class PrimOp:
    """ROT(reg, 2^i, active) | SWAP11(regA, regB) | compute op on the
    leading positions of one register."""

    kind: str
    regs: tuple
    amount: int = 0
    active: bool = True

    def type_key(self):
        return (self.kind, self.amount if self.kind == "ROT" else 0)

    def text(self):
        if self.kind == "ROT":
            return f"ROT r{self.regs[0]} {self.amount}{'' if self.active else ' off'}"
        return f"{self.kind} " + " ".join(f"r{r}" for r in self.regs)


@dataclass
class PrimitiveCircuit:
    m: int
    k: int
    layers: list = field(default_factory=list)

    def add_layer(self, ops):
        ops = list(ops)
        if not ops:
            return
        if len({o.type_key() for o in ops}) != 1:
            raise CompileError("mixed primitive types in one timestep")
        used = [r for o in ops for r in o.regs]
        if len(used) != len(set(used)):
            raise CompileError("two ops on one register in a timestep")
        self.layers.append(ops)

    def depth(self):
        return len(self.layers)

    def op_histogram(self):
        hist = {}
        for layer in self.layers:
            for o in layer:
                key = o.kind if o.kind != "ROT" else f"ROT({o.amount})"
                hist[key] = hist.get(key, 0) + 1
        return hist

    def is_one_serialized(self) -> bool:
        return all(
            len([r for o in layer for r in o.regs])
            == len({r for o in layer for r in o.regs})
            for layer in self.layers
        )

    def is_mono_typed(self) -> bool:
        return all(len({o.type_key() for o in layer}) == 1 for layer in self.layers)


# ---------------------------------------------------------------------------
# register assignment (first-fit bin packing)
# ---------------------------------------------------------------------------


@dataclass
class RegisterAssignment:
    m: int
    k: int
    phi: dict  # qubit -> (register, position), both 1-based register ids

    def registers_used(self):
        return len({r for (r, _) in self.phi.values()})


def assign_registers(layer, W: int, m: int, k: int) -> RegisterAssignment:
    """First-fit pack each gate's support into a single register.

    layer: list of (gate name, qubit tuple); needs k >= 12, m >= 4W/k.
    Untouched qubits fill the remaining slots injectively.
    """
    if k < 12:
        raise CompileError("register size must be at least 12")
    if m * k < W or m < math.ceil(4 * W / k):
        raise CompileError("not enough registers: need m >= 4W/k")
    phi = {}
    a, b = 1, 1
    for name, qubits in layer:
        alpha = len(qubits)
        if alpha > 3:
            raise CompileError("gate arity exceeds 3")
        if alpha > k - b + 1:
            a += 1
            b = 1
        if a > m:
            raise CompileError("bin packing overflow (precondition violated)")
        for off, q in enumerate(qubits):
            if q in phi:
                raise CompileError("overlapping gate supports in one layer")
            phi[q] = (a, b + off)
        b += alpha
    taken = set(phi.values())
    free = ((r, p) for r in range(1, m + 1) for p in range(1, k + 1) if (r, p) not in taken)
    for q in range(W):
        if q not in phi:
            phi[q] = next(free)
    return RegisterAssignment(m, k, phi)


# ---------------------------------------------------------------------------
# serialization (greedy multigraph edge coloring, 2k palette)
# ---------------------------------------------------------------------------


def serialize(gates, m: int, k: int, alpha: int):
    """alpha-serialize one layer of register-level gates (<= 2 regs each).

    Returns (timesteps, colors_used); each timestep holds at most
    max(m // alpha, 1) pairwise register-disjoint gates, and the greedy
    coloring stays within the 2k palette.
    """
    if not 1 <= alpha <= m:
        raise CompileError("alpha out of range")
    palette = 2 * k
    color_of = {}
    class_regs: dict[int, set] = {}
    order = sorted(range(len(gates)), key=lambda gi: -len(set(gates[gi].regs)))
    for gi in order:
        regs = set(gates[gi].regs)
        if len(regs) > 2:
            raise CompileError("gate touches more than two registers")
        c = next((cc for cc in range(palette)
                  if not (regs & class_regs.get(cc, set()))), None)
        if c is None:
            raise CompileError("edge coloring exceeded the 2k palette")
        color_of[gi] = c
        class_regs.setdefault(c, set()).update(regs)
    colors_used = 1 + max(color_of.values()) if color_of else 0
    cap = max(m // alpha, 1)
    steps = []
    for c in range(colors_used):
        cls = [gates[gi] for gi in sorted(color_of) if color_of[gi] == c]
        for start in range(0, len(cls), cap):
            steps.append(cls[start: start + cap])
    return steps, colors_used


# ---------------------------------------------------------------------------
# ROT / SWAP decomposition with a token oracle
# ---------------------------------------------------------------------------


def _rot_sequence(reg, s, k, nu):
    s %= k
    return [PrimOp("ROT", (reg,), amount=2**mbit, active=bool((s >> mbit) & 1))
            for mbit in range(nu)]


def decompose_swap(i: int, j: int, k: int, reg_a: int, reg_b: int, scratch: int | None = None):
    """Primitive block realizing SWAP(i_A, j_B), an involution as a
    permutation.  Same-register swaps route through a scratch register
    whose state is preserved.
    """
    nu = k.bit_length() - 1
    if 1 << nu != k:
        raise CompileError("k must be a power of two")
    if not (1 <= i <= k and 1 <= j <= k):
        raise CompileError("positions out of range")
    ops = []
    if reg_a != reg_b:
        ops += _rot_sequence(reg_a, 1 - i, k, nu)
        ops += _rot_sequence(reg_b, 1 - j, k, nu)
        ops.append(PrimOp("SWAP11", (reg_a, reg_b)))
        ops += _rot_sequence(reg_a, i - 1, k, nu)
        ops += _rot_sequence(reg_b, j - 1, k, nu)
        return ops
    if i == j:
        return []
    if scratch is None or scratch == reg_a:
        raise CompileError("same-register swap needs a distinct scratch register")
    c = scratch
    ops += _rot_sequence(reg_a, 1 - j, k, nu)          # SETUP part 1
    ops.append(PrimOp("SWAP11", (reg_a, c)))
    ops += _rot_sequence(reg_a, j - i, k, nu)          # SETUP part 2
    ops.append(PrimOp("SWAP11", (reg_a, c)))           # middle swap
    ops += _rot_sequence(reg_a, i - j, k, nu)          # SETUP^-1 part 1
    ops.append(PrimOp("SWAP11", (reg_a, c)))
    ops += _rot_sequence(reg_a, j - 1, k, nu)          # SETUP^-1 part 2
    return ops


def apply_movement(ops, where):
    """Token oracle: where maps (reg, pos) -> payload; ops move payloads."""
    k = max(p for (_, p) in where) if where else 0
    for op in ops:
        if op.kind == "ROT":
            if not op.active:
                continue
            reg = op.regs[0]
            moved = {}
            for (r, p), payload in where.items():
                if r == reg:
                    moved[(r, (p - 1 + op.amount) % k + 1)] = payload
                else:
                    moved[(r, p)] = payload
            where = moved
        elif op.kind == "SWAP11":
            ra, rb = op.regs
            where = dict(where)
            where[(ra, 1)], where[(rb, 1)] = where[(rb, 1)], where[(ra, 1)]
        else:
            raise CompileError("token oracle handles movement ops only")
    return where


def identity_tokens(regs, k):
    return {(r, p): (r, p) for r in regs for p in range(1, k + 1)}


def rot_budget(ops) -> int:
    return sum(1 for o in ops if o.kind == "ROT")


def swap11_budget(ops) -> int:
    return sum(1 for o in ops if o.kind == "SWAP11")


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------


@dataclass
class MoveGate:
    regs: tuple     # one or two registers (scratch listed when used)
    reg_a: int
    reg_b: int
    i: int
    j: int
    scratch: int | None = None


@dataclass
class CompiledCircuit:
    prim: PrimitiveCircuit
    m: int
    k: int
    W: int
    assignments: list
    depth_in: int
    color_counts: list
    scratch_reg: int

    @property
    def depth_ratio(self) -> float:
        return self.prim.depth() / max(self.depth_in, 1)

    def report(self):
        klog = self.k * math.log2(self.k)
        return {
            "depth_in": self.depth_in,
            "depth_out": self.prim.depth(),
            "ratio": self.depth_ratio,
            "ratio_over_klogk": self.depth_ratio / klog,
            "registers": self.m,
            "k": self.k,
            "colors": self.color_counts,
            "ops": self.prim.op_histogram(),
            "one_serialized": self.prim.is_one_serialized(),
            "mono_typed": self.prim.is_mono_typed(),
        }


def _perm_two_involutions(perm: dict):
    """perm = s2 o s1 with s1, s2 involutions (disjoint transpositions)."""
    seen = set()
    s1, s2 = [], []
    for start in sorted(perm):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        cur = perm[start]
        while cur != start:
            cycle.append(cur)
            seen.add(cur)
            cur = perm[cur]
        L = len(cycle)
        if L == 1:
            continue
        for idx in range(L):
            a, b = cycle[idx], cycle[(L - 1 - idx) % L]
            if a != b and (b, a) not in [(x, y) for x, y in s1]:
                if (a, b) not in s1 and (b, a) not in s1:
                    s1.append((a, b))
        for idx in range(L):
            a, b = cycle[idx], cycle[(L - idx) % L]
            if a != b and (a, b) not in s2 and (b, a) not in s2:
                s2.append((a, b))
    return s1, s2


def _normalize_layers(circuit):
    """Split mixed layers to one gate type each; expand CZ and SWAP into
    the CLIFF_M generating set."""
    out = []
    for layer in circuit:
        expanded = {"pre": [], "main": [], "post": []}
        mains = {}
        for name, qubits in layer:
            name = name.upper()
            if name == "CZ":
                c, t = qubits
                expanded["pre"].append(("H", (t,)))
                mains.setdefault("CNOT", []).append(("CNOT", (c, t)))
                expanded["post"].append(("H", (t,)))
            elif name == "SWAP":
                a, b = qubits
                mains.setdefault("CNOT", []).append(("CNOT", (a, b)))
                expanded["pre"].append(("CNOT", (b, a)))
                expanded["post"].append(("CNOT", (b, a)))
            elif name in PRIMITIVE_COMPUTE:
                mains.setdefault(name, []).append((name, qubits))
            else:
                raise CompileError(f"unsupported gate {name!r}")
        if expanded["pre"]:
            out.append(expanded["pre"])
        for name in sorted(mains):
            out.append(mains[name])
        if expanded["post"]:
            out.append(expanded["post"])
    return out


def compile_circuit(circuit, W: int, k: int, alpha: int = 1) -> CompiledCircuit:
    """Compile layered Clifford+CCZ gates onto the primitive set.

    circuit: list of layers of (name, qubit tuple) with disjoint supports.
    The output is 1-serialized, mono-typed per timestep, and uses one
    scratch register beyond the ceil(4W/k) computation registers.
    """
    nu = k.bit_length() - 1
    if 1 << nu != k or k < 16:
        raise CompileError("k must be a power of two, at least 16")
    layers = _normalize_layers(circuit)
    m_comp = max(1, math.ceil(4 * W / k))
    m = m_comp + 1
    scratch = m
    prim = PrimitiveCircuit(m, k)
    assignments = []
    color_counts = []
    prev_phi = None
    for layer in layers:
        assignment = assign_registers(layer, W, m_comp, k)
        assignments.append(assignment)
        if prev_phi is not None:
            perm = {prev_phi[q]: assignment.phi[q] for q in range(W)}
            src_used = set(perm)
            dst_used = set(perm.values())
            allpos = [(r, p) for r in range(1, m + 1) for p in range(1, k + 1)]
            for a, b in zip((x for x in allpos if x not in src_used),
                            (x for x in allpos if x not in dst_used)):
                perm[a] = b
            for trans in _perm_two_involutions(perm):
                _emit_swap_round(prim, trans, m, k, scratch, alpha, color_counts)
        prev_phi = assignment.phi
        _emit_compute_layer(prim, layer, assignment, m, k, scratch, alpha)
    return CompiledCircuit(prim, m, k, W, assignments, len(layers), color_counts, scratch)


def _emit_swap_round(prim, transpositions, m, k, scratch, alpha, color_counts):
    gates = []
    for ((r1, p1), (r2, p2)) in transpositions:
        if r1 == r2:
            sc = scratch if r1 != scratch else scratch - 1
            gates.append(MoveGate((r1, sc), r1, r2, p1, p2, scratch=sc))
        else:
            gates.append(MoveGate((r1, r2), r1, r2, p1, p2))
    if not gates:
        return
    steps, colors = serialize(gates, m, k, alpha)
    color_counts.append(colors)
    for step in steps:
        seqs = []
        for g in step:
            if g.reg_a == g.reg_b:
                seqs.append(decompose_swap(g.i, g.j, k, g.reg_a, g.reg_b, scratch=g.scratch))
            else:
                seqs.append(decompose_swap(g.i, g.j, k, g.reg_a, g.reg_b))
        _zip_layers(prim, seqs)


def _zip_layers(prim, seqs):
    """Interleave op sequences into shared mono-typed disjoint layers."""
    depth = max((len(s) for s in seqs), default=0)
    for d in range(depth):
        ops = [s[d] for s in seqs if d < len(s)]
        groups = {}
        for o in ops:
            groups.setdefault(o.type_key(), []).append(o)
        for key in sorted(groups):
            prim.add_layer(groups[key])


def _emit_compute_layer(prim, layer, assignment, m, k, scratch, alpha):
    """Per gate: align the support onto leading positions with involutive
    swap blocks, apply the primitive op, replay the blocks in reverse."""
    for name, qubits in layer:
        regs = {assignment.phi[q][0] for q in qubits}
        if len(regs) != 1:
            raise CompileError("gate not contained in one register after assignment")
        reg = regs.pop()
        sc = scratch if reg != scratch else scratch - 1
        pos_of = {q: p for q, (r, p) in assignment.phi.items() if r == reg}
        blocks = []
        for target, q in enumerate(qubits, start=1):
            cur = pos_of[q]
            if cur == target:
                continue
            blocks.append(decompose_swap(cur, target, k, reg, reg, scratch=sc))
            for q2 in pos_of:
                if pos_of[q2] == cur:
                    pos_of[q2] = target
                elif pos_of[q2] == target:
                    pos_of[q2] = cur
        for b in blocks:
            _zip_layers(prim, [b])
        prim.add_layer([PrimOp(name, (reg,))])
        for b in reversed(blocks):
            _zip_layers(prim, [b])


# ---------------------------------------------------------------------------
# semantic verification
# ---------------------------------------------------------------------------


def _run_compiled_tableau(compiled: CompiledCircuit, prep_gates, seed=0):
    """Apply the compiled circuit to a W-qubit tableau via wire tracking."""
    W = compiled.W
    t = StabilizerTableau(W)
    rng = np.random.default_rng(seed)
    for name, qubits in prep_gates:
        _apply_tableau_gate(t, name, qubits, rng)
    where = {}
    phi1 = compiled.assignments[0].phi
    for q in range(W):
        where[phi1[q]] = q
    for (r, p) in [(r, p) for r in range(1, compiled.m + 1)
                   for p in range(1, compiled.k + 1)]:
        if (r, p) not in where:
            where[(r, p)] = None  # idle ancilla slot
    record = []
    for layer in compiled.prim.layers:
        kind = layer[0].kind
        if kind in ("ROT", "SWAP11"):
            where = apply_movement(layer, where)
            continue
        for op in layer:
            reg = op.regs[0]
            arity = {"H": 1, "S": 1, "MZ": 1, "X": 1, "Y": 1, "Z": 1,
                     "CNOT": 2, "CCZ": 3}[op.kind]
            wires = [where[(reg, pos)] for pos in range(1, arity + 1)]
            if any(w is None for w in wires):
                raise CompileError("compute op hit an idle ancilla slot")
            if op.kind == "MZ":
                record.append(t.measure_z(wires[0], rng))
            else:
                _apply_tableau_gate(t, op.kind, tuple(wires), rng)
    return t, record


def _apply_tableau_gate(t, name, qubits, rng):
    if name == "H":
        t.h(qubits[0])
    elif name == "S":
        t.s(qubits[0])
    elif name == "X":
        t.pauli_x(qubits[0])
    elif name == "Y":
        t.pauli_y(qubits[0])
    elif name == "Z":
        t.pauli_z(qubits[0])
    elif name == "CNOT":
        t.cnot(*qubits)
    elif name == "CZ":
        t.cz(*qubits)
    elif name == "SWAP":
        t.swap(*qubits)
    elif name == "MZ":
        t.measure_z(qubits[0], rng)
    elif name == "CCZ":
        raise CompileError("tableau verification cannot run CCZ")
    else:
        raise CompileError(f"unknown gate {name!r}")


def random_stabilizer_prep(W, rng, depth=6):
    gates = []
    for _ in range(depth):
        kind = rng.integers(0, 3)
        if kind == 0:
            gates.append(("H", (int(rng.integers(W)),)))
        elif kind == 1:
            gates.append(("S", (int(rng.integers(W)),)))
        else:
            a, b = rng.choice(W, size=2, replace=False)
            gates.append(("CNOT", (int(a), int(b))))
    return gates


def verify_equivalence_tableau(circuit, compiled: CompiledCircuit, trials: int,
                               seed: int = 0) -> bool:
    """Tableau equality on random stabilizer inputs (Clifford circuits only)."""
    W = compiled.W
    rng = np.random.default_rng(seed)
    for trial in range(trials):
        prep = random_stabilizer_prep(W, rng)
        t1 = StabilizerTableau(W)
        r1 = np.random.default_rng([seed, trial])
        for name, qubits in prep:
            _apply_tableau_gate(t1, name, qubits, r1)
        for layer in circuit:
            for name, qubits in layer:
                _apply_tableau_gate(t1, name, qubits, r1)
        t2, _ = _run_compiled_tableau(compiled, prep, seed=trial)
        if not stab_group_equal(t1, t2):
            return False
    return True


def _apply_statevector_gate(psi, name, wires, W):
    if name == "H":
        return _sv_1q(psi, wires[0], W, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    if name == "S":
        return _sv_1q(psi, wires[0], W, np.diag([1, 1j]))
    if name == "X":
        return _sv_1q(psi, wires[0], W, np.array([[0, 1], [1, 0]]))
    if name == "Z":
        return _sv_1q(psi, wires[0], W, np.diag([1, -1]))
    if name == "CNOT":
        return _sv_phase_like(psi, wires, W, "cnot")
    if name == "CZ":
        return _sv_phase_like(psi, wires, W, "cz")
    if name == "CCZ":
        return _sv_phase_like(psi, wires, W, "ccz")
    raise CompileError(f"statevector gate {name!r} unsupported")


def _sv_1q(psi, q, W, U):
    psi = psi.reshape([2] * W)
    psi = np.moveaxis(psi, q, 0)
    psi = np.tensordot(U, psi, axes=([1], [0]))
    psi = np.moveaxis(psi, 0, q)
    return psi.reshape(-1)


def _sv_phase_like(psi, wires, W, kind):
    dim = 1 << W
    idx = np.arange(dim)
    bits = [(idx >> (W - 1 - w)) & 1 for w in wires]
    out = psi.copy()
    if kind == "cnot":
        c, t = wires
        flip = np.where(bits[0] == 1, idx ^ (1 << (W - 1 - t)), idx)
        out = psi[flip]
    elif kind == "cz":
        out = psi * np.where(bits[0] & bits[1], -1.0, 1.0)
    elif kind == "ccz":
        out = psi * np.where(bits[0] & bits[1] & bits[2], -1.0, 1.0)
    return out


def verify_equivalence_statevector(circuit, compiled: CompiledCircuit,
                                   seed: int = 0, tol: float = 1e-10) -> float:
    """Dense fidelity check for CCZ-bearing circuits (W <= 12).

    Movement primitives act as wire relabelings, so the statevector stays
    W-qubit.  Returns |<psi1|psi2>|^2.
    """
    W = compiled.W
    if W > 12:
        raise CompileError("statevector verification capped at 12 qubits")
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=1 << W) + 1j * rng.normal(size=1 << W)
    psi /= np.linalg.norm(psi)
    psi1 = psi.copy()
    for layer in circuit:
        for name, qubits in layer:
            psi1 = _apply_statevector_gate(psi1, name, qubits, W)
    psi2 = psi.copy()
    where = {}
    phi1 = compiled.assignments[0].phi
    for q in range(W):
        where[phi1[q]] = q
    for (r, p) in [(r, p) for r in range(1, compiled.m + 1)
                   for p in range(1, compiled.k + 1)]:
        if (r, p) not in where:
            where[(r, p)] = None
    for layer in compiled.prim.layers:
        kind = layer[0].kind
        if kind in ("ROT", "SWAP11"):
            where = apply_movement(layer, where)
            continue
        for op in layer:
            reg = op.regs[0]
            arity = {"H": 1, "S": 1, "X": 1, "Y": 1, "Z": 1, "CNOT": 2, "CCZ": 3}[op.kind]
            wires = [where[(reg, pos)] for pos in range(1, arity + 1)]
            if any(w is None for w in wires):
                raise CompileError("compute op hit an idle ancilla slot")
            psi2 = _apply_statevector_gate(psi2, op.kind, tuple(wires), W)
    fid = abs(np.vdot(psi1, psi2)) ** 2
    return fid
