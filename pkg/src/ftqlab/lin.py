"""Dense linear algebra over GF(2) and GF(2^l), plus classical-code utilities.

Matrices are numpy uint8 arrays of field elements tagged with a
FieldTable.  Everything here is desk scale (< 10^4 entries), so clarity
wins over sparsity; the cubical module layers its own block structure on
top of these primitives.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gfq import GF2, FieldTable, get_field


class LinError(Exception):
    pass


@dataclass
class Mat:
    """Rectangular matrix of field elements."""

    a: np.ndarray
    field: FieldTable = GF2

    def __post_init__(self):
        self.a = np.atleast_2d(np.asarray(self.a, dtype=np.uint8))
        if self.a.size and int(self.a.max()) >= self.field.q:
            raise LinError("entry outside field")

    @property
    def rows(self):
        return self.a.shape[0]

    @property
    def cols(self):
        return self.a.shape[1]

    def __matmul__(self, other):
        if isinstance(other, Mat):
            if other.field != self.field:
                raise LinError("field mismatch")
            return Mat(matmul(self.a, other.a, self.field), self.field)
        return matmul(self.a, np.asarray(other, dtype=np.uint8), self.field)

    def __add__(self, other):
        return Mat(self.a ^ other.a, self.field)

    @property
    def T(self):
        return Mat(self.a.T.copy(), self.field)

    def to_json(self):
        return {
            "field_l": self.field.l,
            "rows": int(self.rows),
            "cols": int(self.cols),
            "data": [int(x) for x in self.a.reshape(-1)],
        }

    @classmethod
    def from_json(cls, obj):
        f = get_field(obj["field_l"])
        a = np.array(obj["data"], dtype=np.uint8).reshape(obj["rows"], obj["cols"])
        return cls(a, f)


def matmul(A, B, field: FieldTable = GF2):
    """C = A B with field arithmetic; shapes follow numpy matmul."""
    A = np.asarray(A, dtype=np.uint8)
    B = np.asarray(B, dtype=np.uint8)
    if field.l == 1:
        return (A.astype(np.int64) @ B.astype(np.int64) % 2).astype(np.uint8)
    single = B.ndim == 1
    if single:
        B = B[:, None]
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.uint8)
    mt = field.mul_table
    for k in range(A.shape[1]):
        col = A[:, k]
        if not col.any():
            continue
        out ^= mt[col[:, None], B[k][None, :]]
    return out[:, 0] if single else out


def matvec(A, x, field: FieldTable = GF2):
    return matmul(A, np.asarray(x, dtype=np.uint8), field)


def rref(M, field: FieldTable = GF2):
    """Reduced row echelon form.  Returns (R, pivot column list)."""
    R = np.atleast_2d(np.asarray(M, dtype=np.uint8)).copy()
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if R[i, c]:
                piv = i
                break
        if piv is None:
            continue
        R[[r, piv]] = R[[piv, r]]
        if field.l > 1 and R[r, c] != 1:
            inv = field.inv(int(R[r, c]))
            R[r] = field.mul_table[R[r], inv]
        for i in range(rows):
            if i != r and R[i, c]:
                f = int(R[i, c])
                if field.l == 1:
                    R[i] ^= R[r]
                else:
                    R[i] ^= field.mul_table[R[r], f]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def rank(M, field: FieldTable = GF2) -> int:
    return len(rref(M, field)[1])


def kernel(M, field: FieldTable = GF2) -> np.ndarray:
    """Basis for the right kernel, one vector per row."""
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    rows, cols = M.shape
    if rows == 0:
        return np.eye(cols, dtype=np.uint8)
    R, pivots = rref(M, field)
    free = [c for c in range(cols) if c not in pivots]
    out = np.zeros((len(free), cols), dtype=np.uint8)
    for i, fc in enumerate(free):
        out[i, fc] = 1
        for r, pc in enumerate(pivots):
            # pivot entry is 1 after rref; char 2 makes negation a no-op
            out[i, pc] = R[r, fc]
    return out


def solve(M, b, field: FieldTable = GF2):
    """One solution x of M x = b, or None when inconsistent."""
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    b = np.asarray(b, dtype=np.uint8)
    rows, cols = M.shape
    aug = np.concatenate([M, b.reshape(rows, -1)], axis=1)
    R, pivots = rref(aug, field)
    nrhs = aug.shape[1] - cols
    pivots_in = [p for p in pivots if p < cols]
    for r in range(len(pivots_in), len(pivots) + (R.shape[0] - len(pivots))):
        if r < R.shape[0] and not R[r, :cols].any() and R[r, cols:].any():
            return None
    # also guard rows below the pivot count
    for r in range(len(pivots_in), rows):
        if not R[r, :cols].any() and R[r, cols:].any():
            return None
    x = np.zeros((cols, nrhs), dtype=np.uint8)
    for r, p in enumerate(pivots_in):
        x[p] = R[r, cols:]
    return x[:, 0] if b.ndim == 1 else x


def inverse(M, field: FieldTable = GF2) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    n = M.shape[0]
    if M.shape[1] != n:
        raise LinError("inverse of non-square matrix")
    X = solve(M, np.eye(n, dtype=np.uint8), field)
    if X is None or rank(M, field) < n:
        raise LinError("singular matrix")
    return X


def congruence_to_identity(G: np.ndarray) -> np.ndarray:
    """P with P G P^T = I over GF(2); see gfq for the reduction."""
    from .gfq import _congruence_to_identity

    return _congruence_to_identity(G)


# ---------------------------------------------------------------------------
# classical codes
# ---------------------------------------------------------------------------

INF_DISTANCE = math.inf


@dataclass
class Distance:
    value: float
    exact: bool

    def __repr__(self):
        if self.value == INF_DISTANCE:
            return "Distance(+inf)"
        tag = "" if self.exact else f">= {self.value} unverified"
        return f"Distance({self.value}{', exact' if self.exact else ', ' + tag})"


class ClassicalCode:
    """Linear code given by a parity-check matrix; generator derived."""

    def __init__(self, check, field: FieldTable = GF2, gen=None):
        self.field = field
        self.check = np.atleast_2d(np.asarray(check, dtype=np.uint8))
        self.n = self.check.shape[1]
        if gen is None:
            gen = kernel(self.check, field)
        self.gen = np.atleast_2d(np.asarray(gen, dtype=np.uint8))
        if self.gen.size == 0:
            self.gen = self.gen.reshape(0, self.n)
        self.k = self.gen.shape[0]
        if matmul(self.check, self.gen.T, field).any():
            raise LinError("generator rows are not in the kernel of the check matrix")
        if rank(self.gen, field) != self.k:
            raise LinError("generator rows dependent")
        if self.k != self.n - rank(self.check, field):
            raise LinError("rank bookkeeping violated")
        self.d_known: Distance | None = None

    @classmethod
    def from_generator(cls, gen, field: FieldTable = GF2):
        gen = np.atleast_2d(np.asarray(gen, dtype=np.uint8))
        chk = kernel(gen, field)
        if chk.size == 0:
            chk = chk.reshape(0, gen.shape[1])
        return cls(chk, field, gen=gen)

    def syndrome(self, x):
        return matvec(self.check, x, self.field)

    def contains(self, x) -> bool:
        return not self.syndrome(x).any()

    def codewords(self):
        """All codewords; only call when q^k is enumerable."""
        q = self.field.q
        if q ** self.k > 1 << 22:
            raise LinError("codeword enumeration too large")
        for msg in itertools.product(range(q), repeat=self.k):
            yield matvec(self.gen.T, np.array(msg, dtype=np.uint8), self.field)

    def dual(self) -> "ClassicalCode":
        return ClassicalCode.from_generator(self.check, self.field)


def min_distance_bruteforce(code: ClassicalCode, cap: int = 16) -> Distance:
    """Exact minimum nonzero codeword weight when enumerable, else a cap bound.

    Enumeration runs over messages when q^k is small; otherwise codewords
    are searched by increasing information-vector weight against an RREF
    generator (its pivot columns carry the message, so a weight-w codeword
    needs information weight at most w and the early exit is sound).
    """
    if code.k == 0:
        return Distance(INF_DISTANCE, True)
    q = code.field.q
    if q ** code.k <= 1 << 20:
        best = code.n + 1
        for cw in code.codewords():
            w = int(np.count_nonzero(cw))
            if 0 < w < best:
                best = w
        return Distance(best, True)
    gen, _ = rref(code.gen, code.field)
    gen = gen[: code.k]
    best = code.n + 1
    nonzero = list(range(1, q))
    for w_info in range(1, code.k + 1):
        if w_info > 6:
            break
        for support in itertools.combinations(range(code.k), w_info):
            for vals in itertools.product(nonzero, repeat=w_info):
                msg = np.zeros(code.k, dtype=np.uint8)
                for s, v in zip(support, vals):
                    msg[s] = v
                w = int(np.count_nonzero(matvec(gen.T, msg, code.field)))
                if 0 < w < best:
                    best = w
        if best <= w_info:  # lighter codewords would need lighter messages
            return Distance(best, True)
    if best <= cap:
        return Distance(best, False)
    return Distance(cap + 1, False)


def star_product(a, b, field: FieldTable = GF2) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape:
        raise LinError("length mismatch in star product")
    if field.l == 1:
        return a & b
    return field.mul_table[a, b]


def star_square_subset(c1: ClassicalCode, c2: ClassicalCode) -> bool:
    """True iff C1 * C1 (coordinate-wise products of generators) lies in C2."""
    if c1.n != c2.n:
        raise LinError("length mismatch")
    for i in range(c1.k):
        for j in range(i, c1.k):
            v = star_product(c1.gen[i], c1.gen[j], c1.field)
            if not c2.contains(v):
                return False
    return True


def _nearest_codeword_distance(x, code: ClassicalCode) -> int:
    best = code.n + 1
    for cw in code.codewords():
        w = int(np.count_nonzero(cw ^ x)) if code.field.l == 1 else int(np.count_nonzero(cw != x))
        if w < best:
            best = w
    return best


def ltc_soundness_estimate(code: ClassicalCode, mode: str = "exhaustive",
                           samples: int = 1000, seed: int = 0) -> float:
    """Smallest observed (|Hx|/r) * (n/d(x,C)) over tested x not in C.

    Exhaustive mode enumerates all of GF(2)^n (n <= 20, k <= 12 for the
    nearest-codeword brute force); sampled mode draws random words.  The
    result upper-bounds the true soundness, exactly in exhaustive mode.
    """
    r = code.check.shape[0]
    if r == 0:
        return INF_DISTANCE
    if code.field.l != 1:
        raise LinError("soundness estimator is GF(2)-only")
    n = code.n
    best = INF_DISTANCE

    def ratio(x):
        s = int(np.count_nonzero(code.syndrome(x)))
        if s == 0:
            return None
        d = _nearest_codeword_distance(x, code)
        return (s / r) * (n / d)

    if mode == "exhaustive":
        if n > 20 or code.k > 12:
            raise LinError("exhaustive soundness capped at n <= 20, k <= 12")
        for bits in range(1, 1 << n):
            x = np.array([(bits >> i) & 1 for i in range(n)], dtype=np.uint8)
            v = ratio(x)
            if v is not None and v < best:
                best = v
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            x = rng.integers(0, 2, size=n).astype(np.uint8)
            v = ratio(x)
            if v is not None and v < best:
                best = v
    else:
        raise LinError(f"unknown mode {mode!r}")
    return best
