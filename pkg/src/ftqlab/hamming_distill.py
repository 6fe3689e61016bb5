"""Self-dual CSS distillation codes and the stabilizer-state distillation round.

A distillation code needs a check matrix H with H H^T = 0 (so X^H and
Z^H jointly generate a CSS stabilizer), an orthonormal logical generator
G (G G^T = I, H G^T = 0), and a decoder for ker H.  Quantum Hamming
codes, [[2^r - 1, 2^r - 2r - 1, 3]], supply a constant-rate family; the
multi-level schedule uses r_l = floor(2 log2(4 l)).

The single round measures X^H / Z^H on every column of an n x b block of
noisy state copies, infers the syndrome of each stabilizer generator of
the target state, corrects via destabilizers, unencodes with a
CNOT-only circuit, and applies a Pauli phase fix-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import lin
from .gfq import _congruence_to_identity
from .pauli import (
    Circuit,
    Op,
    PauliOp,
    StabilizerTableau,
    expected_generators_hold,
    run_tableau,
)


class DistillError(Exception):
    pass


# ---------------------------------------------------------------------------
# code construction
# ---------------------------------------------------------------------------


def _cnot_synthesis(A: np.ndarray):
    """CNOT list whose circuit maps |x> -> |A x| for invertible A over GF(2).

    Returned as [(control, target), ...] in application order.
    """
    M = A.copy() % 2
    n = M.shape[0]
    ops = []  # row additions in reduction order: (c, t) means row t += row c

    def add(c, t):
        M[t] ^= M[c]
        ops.append((c, t))

    for col in range(n):
        if not M[col, col]:
            piv = next((i for i in range(col + 1, n) if M[i, col]), None)
            if piv is None:
                raise DistillError("matrix not invertible")
            add(piv, col)
        for i in range(n):
            if i != col and M[i, col]:
                add(col, i)
    if not np.array_equal(M, np.eye(n, dtype=M.dtype)):
        raise DistillError("reduction failed")
    # reduction is E_m ... E_1 A = I, so the circuit applies E_m first
    return [(c, t) for (c, t) in reversed(ops)]


def _cnot_matrix(ops, n):
    M = np.eye(n, dtype=np.uint8)
    for c, t in ops:
        M[t] ^= M[c]
    return M


class SelfDualDistillCode:
    """H with H H^T = 0, orthonormal G, unit-distance decoder, CNOT encoder."""

    def __init__(self, H: np.ndarray, decoder, name=""):
        self.H = np.atleast_2d(np.asarray(H, dtype=np.uint8))
        self.r, self.n = self.H.shape
        if (self.H @ self.H.T % 2).any():
            raise DistillError("H H^T != 0")
        weights = self.H.sum(axis=1)
        if (weights % 2).any():
            raise DistillError("odd-weight check row (phase bookkeeping undefined)")
        self.decoder = decoder
        self.t = 1
        self.name = name
        self.G = self._orthonormal_logicals()
        self.k = self.G.shape[0]
        if self.k != self.n - 2 * self.r:
            raise DistillError("quantum dimension bookkeeping broken")
        self.encode_ops, self.unencode_ops = self._build_encoder()
        self.theta = np.array(
            [(-1) ** (((int(g.sum()) - 1) // 2) % 2) for g in self.G], dtype=np.int8
        )

    def _orthonormal_logicals(self) -> np.ndarray:
        K = lin.kernel(self.H)
        basis = list(self.H)
        C = []
        for row in K:
            cand = np.array(basis + [row], dtype=np.uint8)
            if lin.rank(cand) == len(basis) + 1:
                basis.append(row)
                C.append(row)
        C = np.array(C, dtype=np.uint8)
        gram = C @ C.T % 2
        P = _congruence_to_identity(gram)
        G = P @ C % 2
        if (G @ G.T % 2 != np.eye(G.shape[0], dtype=np.uint8)).any():
            raise DistillError("orthonormalization failed")
        if (self.H @ G.T % 2).any():
            raise DistillError("logicals leave the kernel")
        return G.astype(np.uint8)

    def _build_encoder(self):
        """A with columns [g | c | h], B = A^-T with columns [g | h | d];
        the CNOT circuit for |x> -> |Ax> maps Z_j -> Z^{G[j]}, X_j -> X^{G[j]},
        Z_{k+i} -> Z^{H[i]} and X_{k+r+i} -> X^{H[i]}."""
        n, k, r = self.n, self.k, self.r
        G, H = self.G, self.H
        M1 = np.concatenate([G, H], axis=0)
        rhs1 = np.concatenate([np.zeros((k, r), dtype=np.uint8), np.eye(r, dtype=np.uint8)], axis=0)
        C = lin.solve(M1, rhs1)
        if C is None:
            raise DistillError("no dual columns for H")
        C = C.T  # r x n rows c_i
        M2 = np.concatenate([G, C, H], axis=0)
        rhs2 = np.concatenate(
            [np.zeros((k + r, r), dtype=np.uint8), np.eye(r, dtype=np.uint8)], axis=0
        )
        D = lin.solve(M2, rhs2)
        if D is None:
            raise DistillError("no dual columns for the X block")
        D = D.T
        A = np.zeros((n, n), dtype=np.uint8)
        B = np.zeros((n, n), dtype=np.uint8)
        A[:, :k] = G.T
        A[:, k: k + r] = C.T
        A[:, k + r:] = H.T
        B[:, :k] = G.T
        B[:, k: k + r] = H.T
        B[:, k + r:] = D.T
        if (A.T @ B % 2 != np.eye(n, dtype=np.uint8)).any():
            raise DistillError("A^T B != I")
        ops = _cnot_synthesis(A)
        if not np.array_equal(_cnot_matrix(ops, n), A):
            raise DistillError("encoder synthesis failed")
        return ops, [(c, t) for (c, t) in reversed(ops)]

    def decode(self, syndrome: np.ndarray) -> np.ndarray:
        return self.decoder(syndrome)


def make_quantum_hamming(r: int) -> SelfDualDistillCode:
    """[[2^r - 1, 2^r - 2r - 1, 3]] quantum Hamming code, r >= 3."""
    if r < 3:
        raise DistillError("quantum Hamming needs r >= 3")
    n = 2**r - 1
    H = np.zeros((r, n), dtype=np.uint8)
    for m in range(n):
        for i in range(r):
            H[i, m] = (m + 1 >> i) & 1

    def decoder(s):
        v = 0
        for i in range(r):
            v |= int(s[i]) << i
        e = np.zeros(n, dtype=np.uint8)
        if v:
            e[v - 1] = 1
        return e

    return SelfDualDistillCode(H, decoder, name=f"quantum-hamming-r{r}")


# ---------------------------------------------------------------------------
# state instances
# ---------------------------------------------------------------------------

NAMED_STATES = {
    "zero": (1, ""),
    "plus": (1, "H 0\n"),
    "y": (1, "H 0\n---\nS 0\n"),
    "bell": (2, "H 0\n---\nCNOT 0 1\n"),
}


@dataclass
class DistillInstance:
    """Target state, its generators, destabilizers, and the phase fix-up."""

    b: int
    prep: Circuit
    stab: list           # (xv, zv, sign) over b qubits
    destab: list         # (xv, zv) partner per generator

    @classmethod
    def from_circuit(cls, prep: Circuit, b: int) -> "DistillInstance":
        t, _ = run_tableau(prep, n=b, seed=0)
        sx, sz, sr = t.stab_rows()
        dx, dz, _ = t.destab_rows()
        stab = [(sx[i].copy(), sz[i].copy(), int(sr[i])) for i in range(b)]
        destab = [(dx[i].copy(), dz[i].copy()) for i in range(b)]
        return cls(b, prep, stab, destab)

    @classmethod
    def named(cls, name: str) -> "DistillInstance":
        b, text = NAMED_STATES[name]
        return cls.from_circuit(Circuit.from_text(text) if text else Circuit([], n=b), b)

    def y_count(self, i: int) -> int:
        xv, zv, _ = self.stab[i]
        return int(np.count_nonzero(xv & zv))


def fixup_operator(code: SelfDualDistillCode, inst: DistillInstance):
    """Pauli correcting encoder phases on Y-type generators (Xi).

    Unencoding a generator with c Y factors picks up theta_j^c on output
    row j; a destabilizer of that generator flips it back.
    """
    k, b = code.k, inst.b
    xv = np.zeros(k * b, dtype=np.uint8)
    zv = np.zeros(k * b, dtype=np.uint8)
    for j in range(k):
        if code.theta[j] == 1:
            continue
        for i in range(b):
            if inst.y_count(i) % 2:
                dx, dz = inst.destab[i]
                xv[j * b: (j + 1) * b] ^= dx
                zv[j * b: (j + 1) * b] ^= dz
    return xv, zv


# ---------------------------------------------------------------------------
# one distillation round
# ---------------------------------------------------------------------------


def _prepare_copies(code: SelfDualDistillCode, inst: DistillInstance, seed: int = 0):
    """psi^{otimes n} on n*b qubits, qubit (row i, col j) = i*b + j."""
    n, b = code.n, inst.b
    t = StabilizerTableau(n * b)
    layers = []
    for layer in inst.prep.layers:
        big = []
        for i in range(n):
            for op in layer:
                big.append(Op(op.name, tuple(i * b + q for q in op.qubits), op.ref, op.axis))
        layers.append(big)
    t, _ = run_tableau(Circuit(layers, n=n * b), n=n * b, tableau=t, seed=seed)
    return t


def _spread(vec_b, row, n, b):
    out = np.zeros(n * b, dtype=np.uint8)
    out[row * b: (row + 1) * b] = vec_b
    return out


def _column_pauli(H_row, col_j, kind, n, b):
    """X^{h} or Z^{h} acting on column j: support (m, j) for h_m = 1."""
    xv = np.zeros(n * b, dtype=np.uint8)
    zv = np.zeros(n * b, dtype=np.uint8)
    for m in range(n):
        if H_row[m]:
            if kind == "X":
                xv[m * b + col_j] = 1
            else:
                zv[m * b + col_j] = 1
    return xv, zv


@dataclass
class DistillRecord:
    tableau: StabilizerTableau
    kept: list
    m_x: np.ndarray
    m_z: np.ndarray
    syndromes: list
    corrections: np.ndarray   # (xv, zv) stacked
    circuit: Circuit | None = None


def distill_once(code: SelfDualDistillCode, inst: DistillInstance, error: PauliOp | None = None,
                 seed: int = 0, route: str = "pauli") -> DistillRecord:
    """One distillation round on psi^{otimes n} with an injected Pauli.

    route="pauli": direct stabilizer measurements (reference semantics).
    route="circuit": unencode first with the CNOT circuit, then single-qubit
    MZ/MX; same classical processing (the emitted gate list is CNOT +
    measurements + classically controlled Paulis only).
    """
    n, k, r, b = code.n, code.k, code.r, inst.b
    t = _prepare_copies(code, inst, seed=seed)
    if error is not None:
        t.apply_pauliop(error)
    rng = np.random.default_rng(seed + 1)

    m_x = np.zeros((r, b), dtype=np.uint8)
    m_z = np.zeros((r, b), dtype=np.uint8)
    circuit = None

    if route == "pauli":
        for j in range(b):
            for i in range(r):
                xv, zv = _column_pauli(code.H[i], j, "X", n, b)
                m_x[i, j] = t.measure_pauli(xv, zv, 0, rng)
            for i in range(r):
                xv, zv = _column_pauli(code.H[i], j, "Z", n, b)
                m_z[i, j] = t.measure_pauli(xv, zv, 0, rng)
    elif route == "circuit":
        layers = []
        for (c, tt) in code.unencode_ops:
            layers.append([Op("CNOT", (c * b + j, tt * b + j)) for j in range(b)])
        mlayer = [Op("MZ", ((kk + k) * b + j,)) for kk in range(r) for j in range(b)]
        mlayer += [Op("MX", ((kk + k + r) * b + j,)) for kk in range(r) for j in range(b)]
        layers.append(mlayer)
        circuit = Circuit(layers, n=n * b)
        t, rec = run_tableau(circuit, n=n * b, tableau=t, seed=seed + 1)
        li = len(layers) - 1
        # MZ on row k+i equals Z^{H[i]} pre-unencode; MX on row k+r+i equals X^{H[i]}
        pos = 0
        for kk in range(r):
            for j in range(b):
                m_z[kk, j] = rec.outcomes[f"m{li}.{pos}"]
                pos += 1
        for kk in range(r):
            for j in range(b):
                m_x[kk, j] = rec.outcomes[f"m{li}.{pos}"]
                pos += 1
    else:
        raise DistillError(f"unknown route {route!r}")

    # per-generator inferred syndromes and corrections
    Ux = np.zeros(n * b, dtype=np.uint8)
    Uz = np.zeros(n * b, dtype=np.uint8)
    syndromes = []
    half = (code.H.sum(axis=1) // 2) % 2
    for gi, (sxv, szv, _) in enumerate(inst.stab):
        a = int(np.count_nonzero(sxv & szv)) % 2
        sigma = np.zeros(r, dtype=np.uint8)
        for i in range(r):
            sigma[i] = (a * half[i]
                        + int(sxv @ m_x[i].astype(np.int64))
                        + int(szv @ m_z[i].astype(np.int64))) % 2
        c = code.decode(sigma)
        syndromes.append(sigma)
        dxv, dzv = inst.destab[gi]
        for m in range(n):
            if c[m]:
                Ux[m * b: (m + 1) * b] ^= dxv
                Uz[m * b: (m + 1) * b] ^= dzv

    if route == "pauli":
        t.apply_pauli(Ux, Uz)
        for (c, tt) in code.unencode_ops:
            for j in range(b):
                t.cnot(c * b + j, tt * b + j)
        for kk in range(r):
            for j in range(b):
                t.measure_z((k + kk) * b + j, rng)
                t.measure_x((k + r + kk) * b + j, rng)
    else:
        # push the correction through the unencode circuit, drop measured rows
        A = _cnot_matrix(code.encode_ops, n)
        Ainv = lin.inverse(A)
        X2 = Ux.reshape(n, b).copy()
        Z2 = Uz.reshape(n, b).copy()
        X2 = (Ainv @ X2) % 2
        Z2 = (A.T @ Z2) % 2
        Ux = X2.reshape(-1)
        Uz = Z2.reshape(-1)
        keep_mask = np.zeros(n * b, dtype=np.uint8)
        keep_mask[: k * b] = 1
        t.apply_pauli(Ux * keep_mask, Uz * keep_mask)

    fx, fz = fixup_operator(code, inst)
    big_fx = np.zeros(n * b, dtype=np.uint8)
    big_fz = np.zeros(n * b, dtype=np.uint8)
    big_fx[: k * b] = fx
    big_fz[: k * b] = fz
    t.apply_pauli(big_fx, big_fz)

    kept = list(range(k * b))
    return DistillRecord(t, kept, m_x, m_z, syndromes, np.stack([Ux, Uz]), circuit)


def output_is_target(code: SelfDualDistillCode, inst: DistillInstance, rec: DistillRecord) -> bool:
    """Stab(output) == Stab(psi^{otimes k}) exactly, signs included."""
    n, k, b = code.n, code.k, inst.b
    gens = []
    for i in range(k):
        for sxv, szv, sign in inst.stab:
            gens.append((_spread(sxv, i, n, b), _spread(szv, i, n, b), sign))
    return expected_generators_hold(rec.tableau, gens, region=rec.kept)


def distill_succeeds(code, inst, error=None, seed=0, route="pauli") -> bool:
    return output_is_target(code, inst, distill_once(code, inst, error, seed, route))


def structural_check(circuit: Circuit, b: int) -> bool:
    """Only CNOT / MZ / MX / classically-controlled Paulis; no two-qubit
    gate couples different [b] coordinates."""
    for layer in circuit.layers:
        for op in layer:
            if op.name not in ("CNOT", "MZ", "MX", "CPAULI"):
                return False
            if op.name == "CNOT" and (op.qubits[0] - op.qubits[1]) % b != 0:
                return False
    return True


# ---------------------------------------------------------------------------
# multi-level schedule and Monte Carlo
# ---------------------------------------------------------------------------


@dataclass
class LevelSpec:
    r: int
    n: int
    k: int


def multilevel_schedule(levels: int):
    """r_l = floor(2 log2(4 l)); returns (specs, M, K) with exact rationals."""
    if levels < 1:
        raise DistillError("levels >= 1")
    specs = []
    M = Fraction(1)
    K = Fraction(1)
    for ell in range(1, levels + 1):
        r = int(math.floor(2 * math.log2(4 * ell)))
        n = 2**r - 1
        k = 2**r - 2 * r - 1
        specs.append(LevelSpec(r, n, k))
        M *= n
        K *= k
    return specs, M, K


def schedule_rate(levels: int) -> Fraction:
    _, M, K = multilevel_schedule(levels)
    return K / M


def _random_pauli_code(rng, b):
    """Nonidentity Pauli on b qubits encoded as a base-4 integer > 0."""
    return int(rng.integers(1, 4**b))


def _code_to_vecs(code_int, b):
    xv = np.zeros(b, dtype=np.uint8)
    zv = np.zeros(b, dtype=np.uint8)
    v = code_int
    for j in range(b):
        c = v % 4
        v //= 4
        if c in (1, 3):
            xv[j] = 1
        if c in (2, 3):
            zv[j] = 1
    return xv, zv


class Level1Memo:
    """Pattern -> success bit for one code/state pair (deterministic)."""

    def __init__(self, code: SelfDualDistillCode, inst: DistillInstance):
        self.code = code
        self.inst = inst
        self.memo: dict[tuple, bool] = {}

    def success(self, pattern) -> bool:
        """pattern: sorted tuple of (row, pauli_code) pairs."""
        key = tuple(sorted(pattern))
        if key not in self.memo:
            n, b = self.code.n, self.inst.b
            xv = np.zeros(n * b, dtype=np.uint8)
            zv = np.zeros(n * b, dtype=np.uint8)
            for row, pc in key:
                px, pz = _code_to_vecs(pc, b)
                xv[row * b: (row + 1) * b] ^= px
                zv[row * b: (row + 1) * b] ^= pz
            err = PauliOp(xv, zv)
            self.memo[key] = distill_succeeds(self.code, self.inst, err, seed=len(self.memo))
        return self.memo[key]


@dataclass
class MultilevelResult:
    levels: int
    trials: int
    eps_in: float
    failures: int
    outputs_per_trial: int
    failure_frequency: float
    wilson99_upper: float
    bound: float


def _mc_chunk(levels, inst, eps_in, seed, trial_range):
    specs, M, K = multilevel_schedule(levels)
    memo = Level1Memo(make_quantum_hamming(specs[0].r), inst)
    total = 0
    for trial in trial_range:
        total += _mc_one_trial(specs, memo, inst.b, int(M), eps_in, seed, trial, levels)
    return total


def multilevel_mc(levels: int, inst: DistillInstance, eps_in: float, trials: int,
                  seed: int = 0, jobs: int = 1) -> MultilevelResult:
    """Monte Carlo of the full schedule with iid per-copy corruption.

    Level 1 is exact (memoized tableau verdicts on the concrete Pauli
    pattern); higher levels use the per-copy good/bad abstraction where a
    round fails when more than t = 1 input copies are bad, and a failed
    round marks all its outputs bad.  Trials draw per-index seed streams,
    so splitting them over workers changes nothing but the wall time.
    """
    from .wenum import wilson_upper

    specs, M, K = multilevel_schedule(levels)
    M_int, K_int = int(M), int(K)
    if jobs > 1 and trials >= 2 * jobs:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [range(i, trials, jobs) for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_mc_chunk, levels, inst, eps_in, seed, list(c))
                       for c in chunks]
            total_bad = sum(f.result() for f in futures)
    else:
        total_bad = _mc_chunk(levels, inst, eps_in, seed, range(trials))
    freq = total_bad / (trials * K_int)
    bound = (64 * inst.b * eps_in) ** (2**levels)
    return MultilevelResult(levels, trials, eps_in, total_bad, K_int, freq,
                            wilson_upper(total_bad, trials * K_int), bound)


def _mc_one_trial(specs, memo, b, M_int, eps_in, seed, trial, levels):
    """Bad-output count of one trial (per-trial seed stream)."""
    rng = np.random.default_rng([seed, trial])
    corrupted = rng.random(M_int) < eps_in
    shape = tuple(s.n for s in reversed(specs))  # (n_l, ..., n_1)
    state = np.zeros(shape, dtype=np.int64).reshape(-1)
    for idx in np.nonzero(corrupted)[0]:
        state[idx] = _random_pauli_code(rng, b)
    state = state.reshape(shape)
    # level 1 on the last axis, exact
    flat = state.reshape(-1, specs[0].n)
    out = np.zeros((flat.shape[0], specs[0].k), dtype=bool)
    for g in range(flat.shape[0]):
        pattern = tuple((int(row), int(flat[g, row])) for row in np.nonzero(flat[g])[0])
        ok = memo.success(pattern) if pattern else True
        out[g, :] = not ok
    cur = out.reshape(shape[:-1] + (specs[0].k,))
    # higher levels on axis -(ell): bad-count rule, t = 1 throughout
    for ell in range(2, levels + 1):
        spec = specs[ell - 1]
        axis = levels - ell
        moved = np.moveaxis(cur, axis, -1)
        lead = moved.shape[:-1]
        flat = moved.reshape(-1, spec.n)
        nxt = np.zeros((flat.shape[0], spec.k), dtype=bool)
        for g in range(flat.shape[0]):
            nxt[g, :] = int(flat[g].sum()) > 1
        cur = np.moveaxis(nxt.reshape(lead + (spec.k,)), -1, axis)
    return int(cur.sum())
