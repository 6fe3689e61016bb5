"""Punctured quantum Reed-Solomon codes over GF(2^l).

Construction: fix systematic coordinates A (|A| = k), punctured
coordinates B subset A (|B| = s), evaluation set M = F_q \\ B.  Then
C1 = evaluations of polynomials of degree < k on M, C2perp = evaluations
of degree-< m polynomials vanishing on B, and the code is CSS(C1, C2)
with parameters [[q-s, k-m+s, min(q-k, m)-s+1]]_q.  Transversal qudit
CCZ acts as logical CCZ on the qudits labeled by B.

Includes the Berlekamp-Welch decoder for both constituent codes, the
CCZ gadget bookkeeping (trace triples, basis change, conversion
template), and the error-pattern level distillation round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lin
from .css import CssCode
from .gfq import (
    FieldBasis,
    FieldTable,
    basis_change_matrix,
    find_self_dual_basis,
    get_field,
    poly_add,
    poly_deg,
    poly_divmod,
    poly_eval,
    poly_mul,
    poly_scalar,
    polynomial_basis,
    trace,
)


class PqrsError(Exception):
    pass


# ---------------------------------------------------------------------------
# interpolation polynomials
# ---------------------------------------------------------------------------


def lagrange_basis(points, t: FieldTable):
    """ell_i(x) for the point set: 1 at points[i], 0 at the others."""
    out = []
    for i, ai in enumerate(points):
        num = [1]
        denom = 1
        for j, aj in enumerate(points):
            if j == i:
                continue
            num = poly_mul(num, [aj, 1], t)  # (x - aj) = (x + aj) in char 2
            denom = t.mul(denom, ai ^ aj)
        out.append(poly_scalar(num, t.inv(denom), t))
    return out


def message_polynomial(msg, lagr, t: FieldTable):
    p = []
    for mi, li in zip(msg, lagr):
        p = poly_add(p, poly_scalar(li, int(mi), t))
    return p


def evaluate_on(points, p, t: FieldTable) -> np.ndarray:
    return np.array([poly_eval(p, x, t) for x in points], dtype=np.uint8)


# ---------------------------------------------------------------------------
# code construction
# ---------------------------------------------------------------------------


class PqrsCode:
    def __init__(self, q, k, m, s, A=None, B=None):
        if not (q // 3 >= k >= m >= s > 0):
            raise PqrsError("need q/3 >= k >= m >= s > 0")
        if not (2 * k <= q - m):
            raise PqrsError("need 2k <= q - m")
        l = q.bit_length() - 1
        if 1 << l != q:
            raise PqrsError("q must be a power of two")
        self.field = get_field(l)
        t = self.field
        self.q, self.k, self.m, self.s = q, k, m, s
        self.A = list(A) if A is not None else list(range(k))
        self.B = list(B) if B is not None else self.A[:s]
        if len(self.A) != k or len(set(self.A)) != k:
            raise PqrsError("A must have k distinct elements")
        if len(self.B) != s or not set(self.B) <= set(self.A):
            raise PqrsError("B must be an s-subset of A")
        self.M = [x for x in range(q) if x not in set(self.B)]
        self.n = len(self.M)
        self.mpos = {x: i for i, x in enumerate(self.M)}

        self.lagr_A = lagrange_basis(self.A, t)

        # C1 = evals of F[x]_{<k} on M
        gen1 = np.array([evaluate_on(self.M, [0] * d + [1], t) for d in range(k)], dtype=np.uint8)
        self.c1 = lin.ClassicalCode.from_generator(gen1, t)
        # C2perp = evals of R * F[x]_{<m-s}, R = prod_{b in B} (x - b)
        R = [1]
        for bb in self.B:
            R = poly_mul(R, [bb, 1], t)
        gen2p = np.array(
            [evaluate_on(self.M, poly_mul(R, [0] * d + [1], t), t) for d in range(m - s)],
            dtype=np.uint8,
        )
        if m - s == 0:
            gen2p = gen2p.reshape(0, self.n)
        self.c2perp = lin.ClassicalCode.from_generator(gen2p, t) if gen2p.shape[0] else None
        # C2 = evals of F[x]_{<q-m} on M (the computed dual)
        gen2 = np.array([evaluate_on(self.M, [0] * d + [1], t) for d in range(q - m)], dtype=np.uint8)
        self.c2 = lin.ClassicalCode.from_generator(gen2, t)

        hx = gen2p if gen2p.shape[0] else np.zeros((0, self.n), dtype=np.uint8)
        hz = self.c1.check  # generators of C1^perp
        self.css = CssCode(hx, hz, t, name=f"pqrs-q{q}")
        if self.css.k != k - m + s:
            raise PqrsError("quantum dimension mismatch")
        self.d_bound = min(q - k, m) - s + 1

    # -- codewords -----------------------------------------------------
    def codeword(self, msg) -> np.ndarray:
        """Evaluation of the message polynomial p_m^{(A)} on M."""
        if len(msg) != self.k:
            raise PqrsError("message length != k")
        p = message_polynomial(msg, self.lagr_A, self.field)
        return evaluate_on(self.M, p, self.field)

    def b_indices_in_A(self):
        return [self.A.index(bb) for bb in self.B]

    # -- exact constituent distances -------------------------------------
    def distance_witnesses(self):
        """Minimum-weight codewords of C1 and C2, exact by root counting.

        A degree-bounded polynomial has at most deg roots, so weight on M
        is at least |M| - deg; placing all roots inside M attains it.
        """
        t = self.field
        out = {}
        for name, deg in (("c1", self.k - 1), ("c2", self.q - self.m - 1)):
            p = [1]
            for x in self.M[:deg]:
                p = poly_mul(p, [x, 1], t)
            w = int(np.count_nonzero(evaluate_on(self.M, p, t)))
            if w != self.n - deg:
                raise PqrsError("distance witness construction failed")
            out[name] = (self.n - deg, evaluate_on(self.M, p, t))
        return out

    def verify_compute_c2(self) -> bool:
        """Dual of C2perp computed by linear algebra equals the evaluation
        description of C2 (row-space equality)."""
        t = self.field
        if self.c2perp is None:
            return self.c2.k == self.n
        dual_gen = lin.kernel(self.c2perp.gen, t)
        r1, _ = lin.rref(dual_gen, t)
        r2, _ = lin.rref(self.c2.gen, t)
        r1 = r1[~np.all(r1 == 0, axis=1)]
        r2 = r2[~np.all(r2 == 0, axis=1)]
        return np.array_equal(r1, r2)


def build_pqrs(q, k, m, s, A=None, B=None) -> PqrsCode:
    return PqrsCode(q, k, m, s, A, B)


def standard_instance(q) -> PqrsCode:
    """The balanced choice k = m = floor(q/3), s = q/4, giving parameters
    [[3q/4, q/4, floor(q/3) - q/4 + 1]]_q with transversal qudit CCZ."""
    if q % 4:
        raise PqrsError("q must be divisible by 4")
    return build_pqrs(q, q // 3, q // 3, q // 4)


# ---------------------------------------------------------------------------
# product / phase identities
# ---------------------------------------------------------------------------


@dataclass
class InterpolationReport:
    triple_identity: bool
    systematic: bool
    product_identity: bool
    checked_triples: int


def interpolation_identities(code: PqrsCode, rng=None, product_trials: int = 50) -> InterpolationReport:
    """Exhaustive sum_M ell_a ell_b ell_c = [a=b=c in B] and the codeword
    product identity on random message triples."""
    t = code.field
    vals = [evaluate_on(code.M, li, t) for li in code.lagr_A]
    b_in_A = set(code.b_indices_in_A())
    ok3 = True
    count = 0
    for a in range(code.k):
        for b in range(code.k):
            for c in range(code.k):
                acc = 0
                for i in range(code.n):
                    acc ^= t.mul(t.mul(int(vals[a][i]), int(vals[b][i])), int(vals[c][i]))
                expect = 1 if (a == b == c and a in b_in_A) else 0
                ok3 &= acc == expect
                count += 1
    # systematicity p_m(alpha_i) = m_i
    rng = rng or np.random.default_rng(0)
    ok_sys = True
    for _ in range(20):
        msg = rng.integers(0, code.q, size=code.k).astype(np.uint8)
        p = message_polynomial(msg, code.lagr_A, t)
        for i, ai in enumerate(code.A):
            ok_sys &= poly_eval(p, ai, t) == int(msg[i])
    # sum_M c1 c2 c3 = sum_B m1 m2 m3  (char-2 sign)
    ok_prod = True
    bpos = code.b_indices_in_A()
    for _ in range(product_trials):
        msgs = [rng.integers(0, code.q, size=code.k).astype(np.uint8) for _ in range(3)]
        cws = [code.codeword(m_) for m_ in msgs]
        lhs = 0
        for i in range(code.n):
            lhs ^= t.mul(t.mul(int(cws[0][i]), int(cws[1][i])), int(cws[2][i]))
        rhs = 0
        for i in bpos:
            rhs ^= t.mul(t.mul(int(msgs[0][i]), int(msgs[1][i])), int(msgs[2][i]))
        ok_prod &= lhs == rhs
    return InterpolationReport(ok3, ok_sys, ok_prod, count)


def logical_ccz_phase(code: PqrsCode, m1, m2, m3, shifts=None) -> tuple:
    """(message-level phase bit, codeword-level phase bit).

    The codeword side may be coset-shifted by C2perp elements; the phase
    is invariant.  Both are GF(2) bits via the field trace.
    """
    t = code.field
    cws = [code.codeword(m_) for m_ in (m1, m2, m3)]
    if shifts is not None:
        cws = [cw ^ sh for cw, sh in zip(cws, shifts)]
    acc = 0
    for i in range(code.n):
        acc ^= t.mul(t.mul(int(cws[0][i]), int(cws[1][i])), int(cws[2][i]))
    cw_bit = trace(acc, t)
    bpos = code.b_indices_in_A()
    acc2 = 0
    for i in bpos:
        acc2 ^= t.mul(t.mul(int(m1[i]), int(m2[i])), int(m3[i]))
    msg_bit = trace(acc2, t)
    return msg_bit, cw_bit


def random_c2perp_element(code: PqrsCode, rng) -> np.ndarray:
    if code.c2perp is None or code.c2perp.k == 0:
        return np.zeros(code.n, dtype=np.uint8)
    coeffs = rng.integers(0, code.q, size=code.c2perp.k).astype(np.uint8)
    return lin.matvec(code.c2perp.gen.T, coeffs, code.field)


# ---------------------------------------------------------------------------
# Berlekamp-Welch decoding
# ---------------------------------------------------------------------------


def bw_decode(points, dim, received, t: FieldTable, radius=None):
    """Decode received against {evals of F[x]_<dim on points}.

    Within radius floor((n - dim) / 2) recovery is exact; beyond it the
    decoder may FAIL (None) and ties are reported as FAIL.
    """
    n = len(points)
    received = np.asarray(received, dtype=np.uint8)
    max_radius = (n - dim) // 2
    if radius is None:
        radius = max_radius
    candidates = {}
    for e in range(0, radius + 1):
        rows = []
        rhs = []
        for i, alpha in enumerate(points):
            row = np.zeros(dim + 2 * e, dtype=np.uint8)
            powers = [t.pow(alpha, j) for j in range(max(dim + e, e + 1))]
            for j in range(dim + e):
                row[j] = powers[j]
            ri = int(received[i])
            for j in range(e):
                row[dim + e + j] = t.mul(ri, powers[j])
            rows.append(row)
            rhs.append(t.mul(ri, t.pow(alpha, e)))
        Mx = np.array(rows, dtype=np.uint8)
        bx = np.array(rhs, dtype=np.uint8)
        sol = lin.solve(Mx, bx, t)
        if sol is None:
            continue
        null = lin.kernel(Mx, t)
        trials = [sol]
        for nv in null[:6]:
            trials.append(sol ^ nv)
        for u in trials:
            Npoly = [int(v) for v in u[: dim + e]]
            Epoly = [int(v) for v in u[dim + e:]] + [1]  # monic degree e
            quot, rem = poly_divmod(Npoly, Epoly, t)
            if rem:
                continue
            if poly_deg(quot) >= dim:
                continue
            cw = evaluate_on(points, quot, t)
            dist = int(np.count_nonzero(cw != received))
            if dist <= radius:
                candidates[tuple(int(v) for v in cw)] = dist
        if candidates:
            break
    if len(candidates) == 1:
        return np.array(next(iter(candidates)), dtype=np.uint8)
    return None  # FAIL: nothing found, or tie


def bw_decode_c1(code: PqrsCode, received, radius=None):
    return bw_decode(code.M, code.k, received, code.field, radius)


def bw_decode_c2(code: PqrsCode, received, radius=None):
    return bw_decode(code.M, code.q - code.m, received, code.field, radius)


# ---------------------------------------------------------------------------
# CCZ gadget bookkeeping
# ---------------------------------------------------------------------------


@dataclass
class CczGadget:
    l: int
    self_dual: FieldBasis
    poly: FieldBasis
    triples: list                 # (i, j, k) with tr(a_i a_j a_k) = 1, 0-indexed
    basis_change_cnots: tuple     # (forward list, backward list) of (ctrl, tgt)
    trace_one_index: int          # poly-basis index j with tr(beta_j) = 1
    measured: dict                # register -> measured qubit indices (0-based)

    def fixup_coefficients(self, x_meas, y_meas, z_meas):
        """Quadratic fix-up polynomial coefficients in (x1, y1, zj).

        Inputs are the measured bits keyed by qubit index; returns a dict
        monomial tuple -> GF(2) coefficient, for all monomials except the
        cubic x1*y1*zj (implemented by the consumed CCZ itself).
        """
        t = self.poly.field
        l = self.l
        j = self.trace_one_index
        T = {}
        B = self.poly.elements

        def tr3(a, b, c):
            return trace(t.mul(t.mul(B[a], B[b]), B[c]), t)

        x = {i: x_meas[i] for i in range(1, l)}
        y = {i: y_meas[i] for i in range(1, l)}
        z = {i: z_meas[i] for i in range(l) if i != j}
        coeffs = {(): 0, ("x1",): 0, ("y1",): 0, ("zj",): 0,
                  ("x1", "y1"): 0, ("x1", "zj"): 0, ("y1", "zj"): 0}
        for a in range(l):
            for b in range(l):
                for c in range(l):
                    tv = tr3(a, b, c)
                    if not tv:
                        continue
                    unknowns = []
                    known = 1
                    if a == 0:
                        unknowns.append("x1")
                    else:
                        known &= x[a]
                    if b == 0:
                        unknowns.append("y1")
                    else:
                        known &= y[b]
                    if c == j:
                        unknowns.append("zj")
                    else:
                        known &= z[c]
                    if not known:
                        continue
                    key = tuple(unknowns)
                    if key == ("x1", "y1", "zj"):
                        continue  # the cubic term is the CCZ itself
                    coeffs[key] ^= 1
        return coeffs


def ccz_gadget_costs(l: int) -> CczGadget:
    """Trace-triple list, basis-change schedule, and conversion template."""
    t = get_field(l)
    sd = find_self_dual_basis(t)
    pb = polynomial_basis(t)
    triples = []
    for i in range(l):
        for j in range(l):
            for kk in range(l):
                if trace(t.mul(t.mul(sd.elements[i], sd.elements[j]), sd.elements[kk]), t):
                    triples.append((i, j, kk))
    if len(triples) > l**3:
        raise PqrsError("triple count exceeds l^3")
    A = basis_change_matrix(sd, pb)
    from .gfq import _gf2_inv

    Ainv = _gf2_inv(A)
    # coords transform row-vector style c_dst = c_src A: first copy
    # a_i = sum_j A[j, i] x_j into the ancilla register, then clear the
    # source with x_j ^= sum_i Ainv[i, j] a_i
    fwd = [("src", j, "anc", i) for i in range(l) for j in range(l) if A[j, i]]
    bwd = [("anc", i, "src", j) for j in range(l) for i in range(l) if Ainv[i, j]]
    j_idx = next((i for i in range(l) if trace(pb.elements[i], t) == 1), None)
    if j_idx is None:
        raise PqrsError("no trace-one basis element (cannot occur)")
    measured = {
        "x": list(range(1, l)),
        "y": list(range(1, l)),
        "z": [i for i in range(l) if i != j_idx],
    }
    return CczGadget(l, sd, pb, triples, (fwd, bwd), j_idx, measured)


# ---------------------------------------------------------------------------
# error-pattern distillation (Algorithm-2 semantics)
# ---------------------------------------------------------------------------


@dataclass
class MagicRoundResult:
    success: bool
    residuals: list  # per register, (x residual, z residual)


def distill_magic_once(code: PqrsCode, faulty, rng=None) -> MagicRoundResult:
    """Pattern-level round: positions in `faulty` carry qudit X/Z errors on
    all three registers; both sides decode with Berlekamp-Welch.

    faulty: dict position -> 6-tuple (xa, za, xb, zb, xc, zc) of field
    elements, or an iterable of positions (random nonzero values drawn).
    """
    t = code.field
    n = code.n
    rng = rng or np.random.default_rng(0)
    if not isinstance(faulty, dict):
        faulty = {
            int(p): tuple(int(v) for v in rng.integers(0, code.q, size=6))
            for p in faulty
        }
    ex = [np.zeros(n, dtype=np.uint8) for _ in range(3)]
    ez = [np.zeros(n, dtype=np.uint8) for _ in range(3)]
    for pos, vals in faulty.items():
        for reg in range(3):
            ex[reg][pos] = vals[2 * reg]
            ez[reg][pos] = vals[2 * reg + 1]
    residuals = []
    success = True
    for reg in range(3):
        # X errors: syndrome w.r.t. Z checks (C1perp); ker = C1
        v = _syndrome_consistent_vector(code.css.hz, ex[reg], t)
        cw = bw_decode_c1(code, v)
        ex_hat = None if cw is None else (v ^ cw)
        rx = _residual(ex[reg], ex_hat, code.c2perp, t)
        # Z errors: syndrome w.r.t. X checks (C2perp); ker = C2
        v = _syndrome_consistent_vector(code.css.hx, ez[reg], t)
        cw = bw_decode_c2(code, v)
        ez_hat = None if cw is None else (v ^ cw)
        rz = _residual(ez[reg], ez_hat, code.c1, t, dual=True)
        residuals.append((rx, rz))
        success &= rx is not None and rz is not None and not rx.any() and not rz.any()
    return MagicRoundResult(success, residuals)


def _syndrome_consistent_vector(checks, e, t):
    if checks.shape[0] == 0:
        return e.copy()
    syn = lin.matvec(checks, e, t)
    v = lin.solve(checks, syn, t)
    if v is None:
        raise PqrsError("inconsistent syndrome")
    return v


def _residual(e, e_hat, stab_code, t, dual=False):
    """e - e_hat reduced modulo the stabilizer side; None when decode failed."""
    if e_hat is None:
        return None
    r = e ^ e_hat
    if not r.any():
        return r
    if stab_code is None:
        return r
    gen = stab_code.check if dual else stab_code.gen
    # membership in the stabilizer row space counts as zero residual
    sol = lin.solve(gen.T, r, t)
    if sol is not None:
        return np.zeros_like(r)
    return r


# ---------------------------------------------------------------------------
# multi-level schedule
# ---------------------------------------------------------------------------


@dataclass
class MagicLevelSpec:
    q: int
    l: int
    n: int
    k: int
    d: int
    t: int
    resources: int   # n * l^3 inputs consumed per round


def magic_schedule(levels: int, q_override=None):
    specs = []
    M = Fraction(1)
    K = Fraction(1)
    for i in range(1, levels + 1):
        q = q_override[i - 1] if q_override else 64 * 2 ** math.ceil(math.log2(i)) if i > 1 else 64
        l = q.bit_length() - 1
        k = q // 4
        m = q // 3
        d = q // 3 - q // 4 + 1
        code_t = (d - 1) // 2
        n = 3 * q // 4
        # achievable correction radius: bounded-distance decoding both sides
        bw_z = (n - (q - m)) // 2
        bw_x = (n - m) // 2
        t_eff = min(code_t, bw_z, bw_x)
        resources = n * l**3
        specs.append(MagicLevelSpec(q, l, n, k, d, t_eff, resources))
        M *= resources
        K *= k
    return specs, M, K


@dataclass
class MagicMcResult:
    levels: int
    trials: int
    eps_in: float
    failures: int
    outputs_per_trial: int
    failure_frequency: float
    yield_fraction: Fraction


def magic_multilevel(levels: int, eps_in: float, trials: int, seed: int = 0,
                     q_override=None) -> MagicMcResult:
    """Pattern-level Monte Carlo of the multi-level magic schedule.

    A position is marked faulty when any of its l^3 resource inputs is
    faulty; a round fails when more than t positions are faulty, and a
    failed round marks all its outputs faulty.
    """
    specs, M, K = magic_schedule(levels, q_override)
    M_int, K_int = int(M), int(K)
    total_bad = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        shape = tuple(s.resources for s in reversed(specs))
        cur = None
        for ell, spec in enumerate(specs, start=1):
            l3 = spec.l**3
            if ell == 1:
                groups = M_int // spec.resources
                bad = np.zeros((groups, spec.k), dtype=bool)
                for g in range(groups):
                    cnt = rng.binomial(spec.resources, eps_in)
                    if cnt == 0:
                        continue
                    slots = rng.choice(spec.resources, size=cnt, replace=False)
                    positions = np.unique(slots // l3)
                    bad[g, :] = len(positions) > spec.t
                lead = tuple(s.resources for s in reversed(specs[1:]))
                cur = bad.reshape(lead + (spec.k,)) if lead else bad.reshape(spec.k)
            else:
                axis = levels - ell
                moved = np.moveaxis(cur, axis, -1)
                lead = moved.shape[:-1]
                flat = moved.reshape(-1, spec.resources)
                nxt = np.zeros((flat.shape[0], spec.k), dtype=bool)
                for g in range(flat.shape[0]):
                    idx = np.nonzero(flat[g])[0]
                    positions = np.unique(idx // l3)
                    nxt[g, :] = len(positions) > spec.t
                cur = np.moveaxis(nxt.reshape(lead + (spec.k,)), -1, axis)
        total_bad += int(cur.sum())
    freq = total_bad / (trials * K_int)
    return MagicMcResult(levels, trials, eps_in, total_bad, K_int, freq, K / M)
