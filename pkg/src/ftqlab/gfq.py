"""Arithmetic in GF(2^l) for small l, traces, and basis machinery.

Field elements are l-bit integers holding coordinates in the polynomial
basis of a fixed irreducible modulus.  Addition is XOR; multiplication
goes through log/antilog tables built once per field.  Other bases
(self-dual in particular) are views obtained through GF(2) basis-change
matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

# Lowest-weight irreducible modulus per extension degree, as a bitmask
# with bit i = coefficient of x^i.  Fixed so that runs are reproducible
# across machines.
CANONICAL_MODULI = {
    1: 0b10,            # x
    2: 0b111,           # x^2 + x + 1
    3: 0b1011,          # x^3 + x + 1
    4: 0b10011,         # x^4 + x + 1
    5: 0b100101,        # x^5 + x^2 + 1
    6: 0b1000011,       # x^6 + x + 1
    7: 0b10000011,      # x^7 + x + 1
    8: 0b100011011,     # x^8 + x^4 + x^3 + x + 1
}

MAX_EXTENSION_DEGREE = 8


class FieldError(Exception):
    pass


def _clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials in bitmask form."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _polymod(a: int, modulus: int) -> int:
    dm = modulus.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= modulus << (a.bit_length() - 1 - dm)
    return a


def _is_irreducible(modulus: int) -> bool:
    deg = modulus.bit_length() - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    # trial division by every polynomial of degree 1..deg//2
    for d in range(1, deg // 2 + 1):
        for low in range(1 << d):
            divisor = (1 << d) | low
            # long division remainder
            rem = modulus
            while rem.bit_length() >= divisor.bit_length():
                rem ^= divisor << (rem.bit_length() - divisor.bit_length())
            if rem == 0:
                return False
    return True


class FieldTable:
    """GF(2^l) with log/antilog tables; immutable after construction."""

    def __init__(self, l: int, modulus: int | None = None):
        if not 1 <= l <= MAX_EXTENSION_DEGREE:
            raise FieldError(f"extension degree {l} outside supported range 1..{MAX_EXTENSION_DEGREE}")
        if modulus is None:
            modulus = CANONICAL_MODULI[l]
        if modulus.bit_length() - 1 != l:
            raise FieldError("modulus degree does not match l")
        if not _is_irreducible(modulus):
            raise FieldError(f"modulus {modulus:#b} is reducible")
        self.l = l
        self.modulus = modulus
        self.q = 1 << l
        self._build_tables()

    def _build_tables(self):
        q = self.q
        mul_table = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            for b in range(a, q):
                p = _polymod(_clmul(a, b), self.modulus)
                mul_table[a, b] = p
                mul_table[b, a] = p
        self.mul_table = mul_table
        inv_table = np.zeros(q, dtype=np.uint8)
        for a in range(1, q):
            row = mul_table[a]
            inv_table[a] = int(np.nonzero(row == 1)[0][0])
        self.inv_table = inv_table
        # a^(q-1) = 1 for every nonzero a
        for a in range(1, q):
            if self.pow(a, q - 1) != 1:
                raise FieldError("field axioms violated (bad modulus?)")

    # -- scalar ops ---------------------------------------------------
    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return int(self.inv_table[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        out, base = 1, a
        while e:
            if e & 1:
                out = int(self.mul_table[out, base])
            base = int(self.mul_table[base, base])
            e >>= 1
        return out

    # -- vectorized ops (uint8 arrays of elements) --------------------
    def mul_vec(self, a, b):
        return self.mul_table[np.asarray(a, dtype=np.uint8), np.asarray(b, dtype=np.uint8)]

    def elements(self):
        return range(self.q)

    def __repr__(self):
        return f"GF(2^{self.l})"

    def __eq__(self, other):
        return isinstance(other, FieldTable) and self.l == other.l and self.modulus == other.modulus

    def __hash__(self):
        return hash((self.l, self.modulus))


@lru_cache(maxsize=None)
def get_field(l: int, modulus: int | None = None) -> FieldTable:
    return FieldTable(l, modulus)


GF2 = get_field(1)


def trace(a: int, t: FieldTable) -> int:
    """tr(a) = sum of a^(2^i), i = 0..l-1, landing in GF(2)."""
    acc, cur = 0, a
    for _ in range(t.l):
        acc ^= cur
        cur = t.mul(cur, cur)
    if acc not in (0, 1):
        raise FieldError("trace left the prime subfield")
    return acc


def coords(x: int, basis: "FieldBasis") -> np.ndarray:
    """Coordinates of x in the given basis, as a GF(2) vector."""
    return basis._decompose(x)


def from_coords(c, basis: "FieldBasis") -> int:
    x = 0
    for ci, b in zip(c, basis.elements):
        if ci & 1:
            x ^= b
    return x


@dataclass(frozen=True)
class FieldBasis:
    """An ordered GF(2)-basis of GF(2^l)."""

    field: FieldTable
    elements: tuple
    kind: str = "other"  # polynomial | self_dual | other
    _solve_cache: dict = dc_field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        l = self.field.l
        if len(self.elements) != l:
            raise FieldError("basis size != l")
        M = np.array([[(b >> i) & 1 for i in range(l)] for b in self.elements], dtype=np.uint8)
        if _gf2_rank(M) != l:
            raise FieldError("basis elements are GF(2)-linearly dependent")

    def gram(self) -> np.ndarray:
        """Trace Gram matrix tr(b_i b_j) over GF(2)."""
        l = self.field.l
        G = np.zeros((l, l), dtype=np.uint8)
        for i, bi in enumerate(self.elements):
            for j, bj in enumerate(self.elements):
                G[i, j] = trace(self.field.mul(bi, bj), self.field)
        return G

    @property
    def dual_check(self) -> np.ndarray:
        return self.gram()

    def is_self_dual(self) -> bool:
        return bool(np.array_equal(self.gram(), np.eye(self.field.l, dtype=np.uint8)))

    def _decompose(self, x: int) -> np.ndarray:
        l = self.field.l
        key = "B"
        if key not in self._solve_cache:
            # rows of B = bit vectors of basis elements; x_bits = c . B
            B = np.array([[(b >> i) & 1 for i in range(l)] for b in self.elements], dtype=np.uint8)
            self._solve_cache[key] = _gf2_inv(B)
        Binv = self._solve_cache[key]
        xbits = np.array([(x >> i) & 1 for i in range(self.field.l)], dtype=np.uint8)
        return (xbits @ Binv) % 2


def polynomial_basis(t: FieldTable) -> FieldBasis:
    if t.l == 1:
        return FieldBasis(t, (1,), kind="polynomial")
    return FieldBasis(t, tuple(t.pow(2, i) for i in range(t.l)), kind="polynomial")


# -- tiny GF(2) helpers local to this module (lin has the general ones) --

def _gf2_rank(M: np.ndarray) -> int:
    M = M.copy() % 2
    r = 0
    rows, cols = M.shape
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if M[i, c]:
                piv = i
                break
        if piv is None:
            continue
        M[[r, piv]] = M[[piv, r]]
        for i in range(rows):
            if i != r and M[i, c]:
                M[i] ^= M[r]
        r += 1
    return r


def _gf2_inv(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    A = np.concatenate([M.copy() % 2, np.eye(n, dtype=np.uint8)], axis=1)
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, n):
            if A[i, c]:
                piv = i
                break
        if piv is None:
            raise FieldError("matrix not invertible over GF(2)")
        A[[r, piv]] = A[[piv, r]]
        for i in range(n):
            if i != r and A[i, c]:
                A[i] ^= A[r]
        r += 1
    return A[:, n:]


def _congruence_to_identity(G: np.ndarray) -> np.ndarray:
    """P with P G P^T = I over GF(2), for symmetric invertible non-alternating G.

    Greedy symmetric reduction; when the residual becomes alternating, a
    previously fixed norm-1 row is recombined with the hyperbolic pair
    (the classical I1 (+) Alt2 ~ I3 trick).
    """
    G = G.copy() % 2
    k = G.shape[0]
    P = np.eye(k, dtype=np.uint8)

    def cur():
        return (P @ G @ P.T) % 2

    i = 0
    while i < k:
        C = cur()
        pivots = [j for j in range(i, k) if C[j, j]]
        if pivots:
            j = pivots[0]
            if j != i:
                P[[i, j]] = P[[j, i]]
                C = cur()
            for j2 in range(i + 1, k):
                if C[i, j2]:
                    P[j2] ^= P[i]
            i += 1
            continue
        # residual alternating: need an earlier unit-norm row to break it
        if i == 0:
            raise FieldError("form is alternating; no orthonormal basis exists")
        C = cur()
        pair = None
        for a in range(i, k):
            for b in range(a + 1, k):
                if C[a, b]:
                    pair = (a, b)
                    break
            if pair:
                break
        if pair is None:
            raise FieldError("singular form")
        a, b = pair
        if a != i:
            P[[i, a]] = P[[a, i]]
        if b != i + 1:
            P[[i + 1, b]] = P[[b, i + 1]]
        C = cur()
        # decouple remaining rows from the hyperbolic pair (i, i+1)
        for j2 in range(i + 2, k):
            if C[i, j2]:
                P[j2] ^= P[i + 1]
            if C[i + 1, j2]:
                P[j2] ^= P[i]
        u = P[i - 1].copy()
        pa = P[i].copy()
        pb = P[i + 1].copy()
        P[i - 1] = u ^ pa
        P[i] = u ^ pb
        P[i + 1] = u ^ pa ^ pb
        i += 2
    if not np.array_equal(cur(), np.eye(k, dtype=np.uint8)):
        raise FieldError("congruence reduction failed")
    return P


def find_self_dual_basis(t: FieldTable) -> FieldBasis:
    """Basis with tr(a_i a_j) = delta_ij, exact.

    Exhaustive (lexicographically first) for l <= 5; for larger l the
    trace Gram of the polynomial basis is congruence-reduced to the
    identity and the result Gram-checked.
    """
    l = t.l
    if l == 1:
        return FieldBasis(t, (1,), kind="self_dual")
    if l <= 5:
        # only elements with tr(a*a) = tr(a) = 1 can sit in a self-dual basis
        cand = [a for a in range(1, t.q) if trace(a, t) == 1]

        def extend(partial):
            if len(partial) == l:
                return partial
            start = cand.index(partial[-1]) + 1 if partial else 0
            for idx in range(start, len(cand)):
                a = cand[idx]
                if all(trace(t.mul(a, b), t) == 0 for b in partial):
                    got = extend(partial + [a])
                    if got:
                        return got
            return None

        found = extend([])
        if found is None:
            raise FieldError("self-dual basis search exhausted")  # cannot occur for q even
        basis = FieldBasis(t, tuple(found), kind="self_dual")
    else:
        poly = polynomial_basis(t)
        P = _congruence_to_identity(poly.gram())
        elems = tuple(from_coords(P[i], poly) for i in range(l))
        basis = FieldBasis(t, elems, kind="self_dual")
    if not basis.is_self_dual():
        raise FieldError("self-dual basis search exhausted")
    return basis


def basis_change_matrix(src: FieldBasis, dst: FieldBasis) -> np.ndarray:
    """A over GF(2) with dst-coords(x) = src-coords(x) @ A for all x."""
    if src.field != dst.field:
        raise FieldError("bases over different fields")
    l = src.field.l
    A = np.zeros((l, l), dtype=np.uint8)
    for i, b in enumerate(src.elements):
        A[i] = coords(b, dst)
    return A


# -- polynomials over GF(q), coefficient index = degree ----------------

def poly_trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_deg(p) -> int:
    p = poly_trim(p)
    return len(p) - 1 if p else -1


def poly_eval(p, x: int, t: FieldTable) -> int:
    acc = 0
    for c in reversed(poly_trim(p)):
        acc = t.mul(acc, x) ^ c
    return acc


def poly_mul(p, r, t: FieldTable):
    p, r = poly_trim(p), poly_trim(r)
    if not p or not r:
        return []
    out = [0] * (len(p) + len(r) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(r):
            out[i + j] ^= t.mul(a, b)
    return out


def poly_add(p, r):
    n = max(len(p), len(r))
    return poly_trim([(p[i] if i < len(p) else 0) ^ (r[i] if i < len(r) else 0) for i in range(n)])


def poly_scalar(p, c: int, t: FieldTable):
    return [t.mul(c, a) for a in p]


def poly_divmod(num, den, t: FieldTable):
    num, den = poly_trim(num), poly_trim(den)
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [0] * max(len(num) - len(den) + 1, 0)
    rem = list(num)
    dlead_inv = t.inv(den[-1])
    while len(rem) >= len(den) and poly_trim(rem):
        rem = poly_trim(rem)
        if len(rem) < len(den):
            break
        shift = len(rem) - len(den)
        factor = t.mul(rem[-1], dlead_inv)
        quot[shift] = factor
        for i, d in enumerate(den):
            rem[shift + i] ^= t.mul(factor, d)
    return poly_trim(quot), poly_trim(rem)


def sum_over_field(p, t: FieldTable) -> int:
    """Sum of p(x) over all x in the field.

    Zero unless deg p = q-1, in which case the sum is the leading
    coefficient (its additive inverse, which coincides in char 2).
    """
    d = poly_deg(p)
    if d > t.q - 1:
        raise FieldError("degree exceeds q-1; reduce by x^q = x first")
    if d == t.q - 1:
        return poly_trim(p)[-1]
    return 0


def naive_field_sum(p, t: FieldTable) -> int:
    """Term-by-term oracle for sum_over_field."""
    acc = 0
    for x in t.elements():
        acc ^= poly_eval(p, x, t)
    return acc
