"""Sheaf chain complexes on cubical complexes, and their local complexes.

A face of type S carries the vector space F^(prod_{j not in S} m_j),
slots ordered by ascending direction.  The coboundary contracts the new
direction's slot with a column of h_i; the boundary is its transpose
(character-2 fields, no signs).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..gfq import GF2, FieldTable
from .. import lin
from .complex import CubicalComplex, CubicalError, Face


def _kron_chain(mats):
    out = np.array([[1]], dtype=np.uint8)
    for m in mats:
        out = np.kron(out, m)
    return out


class SheafComplex:
    def __init__(self, complex: CubicalComplex, h_list, field: FieldTable = GF2):
        self.X = complex
        self.field = field
        self.h = [np.atleast_2d(np.asarray(h, dtype=np.uint8)) for h in h_list]
        if len(self.h) != complex.t:
            raise CubicalError("one local matrix per direction required")
        self.m = [h.shape[0] for h in self.h]
        for i, h in enumerate(self.h):
            if h.shape[1] != complex.n:
                raise CubicalError("local matrix width must equal n")
            if h.shape[0] > h.shape[1]:
                raise CubicalError("m_i <= n required")
            if lin.rank(h, field) != h.shape[0]:
                raise CubicalError(f"h_{i} is not full row rank")
        self._deltas = {}
        self._layout = {}

    # -- vector layout -----------------------------------------------------
    def block_dim(self, type_tuple) -> int:
        out = 1
        for j in range(self.X.t):
            if j not in type_tuple:
                out *= self.m[j]
        return out

    def layout(self, k: int):
        """(faces, offsets, total dim) for level k."""
        if k not in self._layout:
            faces = self.X.faces(k)
            offsets = []
            pos = 0
            for f in faces:
                offsets.append(pos)
                pos += self.block_dim(f.type)
            self._layout[k] = (faces, np.array(offsets + [pos]), pos)
        return self._layout[k]

    def dim(self, k: int) -> int:
        return self.layout(k)[2]

    def dim_formula(self, k: int) -> int:
        """N n^k 2^(t-k) sum_{|T| = t-k} prod_{j in T} m_j."""
        t, n, N = self.X.t, self.X.n, self.X.N
        s = 0
        for T in itertools.combinations(range(t), t - k):
            p = 1
            for j in T:
                p *= self.m[j]
            s += p
        return N * n**k * 2 ** (t - k) * s

    def block(self, vec, k, f: Face):
        faces, offsets, _ = self.layout(k)
        i = self.X.index(f)
        return vec[offsets[i]: offsets[i + 1]]

    def block_weight(self, vec, k) -> int:
        _, offsets, _ = self.layout(k)
        w = 0
        for i in range(len(offsets) - 1):
            if vec[offsets[i]: offsets[i + 1]].any():
                w += 1
        return w

    def block_support(self, vec, k):
        faces, offsets, _ = self.layout(k)
        return [faces[i] for i in range(len(faces)) if vec[offsets[i]: offsets[i + 1]].any()]

    def _slot_matrix(self, out_type, i, a_idx):
        """(id (x) h_i[a]^T (x) id): V_{out_type minus... } -> V_{out_type}
        contracting slot i (ascending slot order)."""
        mats = []
        for j in range(self.X.t):
            if j in out_type and j != i:
                continue
            if j == i:
                mats.append(self.h[i][:, a_idx].reshape(1, self.m[i]))
            elif j not in out_type:
                mats.append(np.eye(self.m[j], dtype=np.uint8))
        return _kron_chain(mats)

    def delta_matrix(self, k: int) -> np.ndarray:
        """Matrix of delta^k: C^k -> C^{k+1}, dense over the field."""
        if k in self._deltas:
            return self._deltas[k]
        faces_in, off_in, dim_in = self.layout(k)
        faces_out, off_out, dim_out = self.layout(k + 1)
        D = np.zeros((dim_out, dim_in), dtype=np.uint8)
        for fi, f in enumerate(faces_out):
            r0, r1 = off_out[fi], off_out[fi + 1]
            for (j, fdn) in self.X.down(f):
                B = self._slot_matrix(f.type, j, f.a_index(j))
                ci = self.X.index(fdn)
                c0, c1 = off_in[ci], off_in[ci + 1]
                if self.field.l == 1:
                    D[r0:r1, c0:c1] ^= B
                else:
                    D[r0:r1, c0:c1] = D[r0:r1, c0:c1] ^ B
        self._deltas[k] = D
        return D

    def partial_matrix(self, k: int) -> np.ndarray:
        """Matrix of partial_k = (delta^{k-1})^T: C_k -> C_{k-1}."""
        return self.delta_matrix(k - 1).T

    def delta(self, vec, k):
        return lin.matvec(self.delta_matrix(k), vec, self.field)

    def partial(self, vec, k):
        return lin.matvec(self.partial_matrix(k), vec, self.field)

    def verify_dd_zero(self) -> bool:
        for k in range(self.X.t - 1):
            prod = lin.matmul(self.delta_matrix(k + 1), self.delta_matrix(k), self.field)
            if prod.any():
                return False
        return True

    def to_json(self):
        """Faces, incidence, and local matrices, level by level."""
        X = self.X
        out = {
            "t": X.t,
            "n": X.n,
            "N": X.N,
            "h": [[[int(v) for v in row] for row in h] for h in self.h],
            "field_l": self.field.l,
            "levels": [],
        }
        for k in range(X.t + 1):
            faces = []
            for f in X.faces(k):
                spec = [list(s) for s in f.spec]
                down = [[j, X.index(fd)] for (j, fd) in X.down(f)]
                faces.append({"g": f.g, "spec": spec, "block_dim": self.block_dim(f.type),
                              "down": down})
            out["levels"].append(faces)
        return out

    def dual(self) -> "SheafComplex":
        """Same complex with h_i replaced by generator matrices of ker h_i
        (cached: decoder contexts hang off the instance)."""
        if getattr(self, "_dual", None) is None:
            duals = []
            for h in self.h:
                hp = lin.kernel(h, self.field)
                if hp.shape[0] == 0:
                    raise CubicalError("trivial kernel: dual sheaf undefined")
                duals.append(hp)
            self._dual = SheafComplex(self.X, duals, self.field)
        return self._dual


def css_from_sheaf(sheaf: SheafComplex, k: int):
    """Qubits at level k: X checks from delta^k, Z checks from partial_k."""
    from ..css import CssCode

    if not 1 <= k <= sheaf.X.t - 1:
        raise CubicalError("level must be inside the complex")
    hx = sheaf.delta_matrix(k)
    hz = sheaf.partial_matrix(k)
    return CssCode(hx, hz, sheaf.field, name=f"sheaf-t{sheaf.X.t}-k{k}")


# ---------------------------------------------------------------------------
# local complexes  C(L_S)
# ---------------------------------------------------------------------------


class LocalComplex:
    """Product complex over type subset S: faces (T, a-tuple), T subset S."""

    def __init__(self, S, h_list, field: FieldTable = GF2, n=None):
        self.S = tuple(sorted(S))
        self.field = field
        self.h = {j: np.atleast_2d(np.asarray(h_list[j], dtype=np.uint8)) for j in self.S}
        self.n = n if n is not None else (self.h[self.S[0]].shape[1] if self.S else 0)
        self.m = {j: self.h[j].shape[0] for j in self.S}
        self._faces = {}
        self._layout = {}
        self._deltas = {}

    def faces(self, k: int):
        if k not in self._faces:
            out = []
            for T in itertools.combinations(self.S, k):
                for a_idx in itertools.product(range(self.n), repeat=k):
                    out.append((T, a_idx))
            self._faces[k] = out
        return self._faces[k]

    def block_dim(self, T) -> int:
        out = 1
        for j in self.S:
            if j not in T:
                out *= self.m[j]
        return out

    def layout(self, k: int):
        if k not in self._layout:
            faces = self.faces(k)
            offsets = []
            pos = 0
            for (T, _) in faces:
                offsets.append(pos)
                pos += self.block_dim(T)
            self._layout[k] = (faces, np.array(offsets + [pos]), pos)
        return self._layout[k]

    def dim(self, k: int) -> int:
        return self.layout(k)[2]

    def index(self, face) -> int:
        faces = self.faces(len(face[0]))
        return faces.index(face)

    def block_weight(self, vec, k) -> int:
        _, offsets, _ = self.layout(k)
        return sum(
            1 for i in range(len(offsets) - 1) if vec[offsets[i]: offsets[i + 1]].any()
        )

    def _slot_matrix(self, out_T, i, a_idx):
        mats = []
        for j in self.S:
            if j in out_T and j != i:
                continue
            if j == i:
                mats.append(self.h[i][:, a_idx].reshape(1, self.m[i]))
            elif j not in out_T:
                mats.append(np.eye(self.m[j], dtype=np.uint8))
        return _kron_chain(mats)

    def delta_matrix(self, k: int) -> np.ndarray:
        if k in self._deltas:
            return self._deltas[k]
        faces_in, off_in, dim_in = self.layout(k)
        faces_out, off_out, dim_out = self.layout(k + 1)
        idx_in = {f: i for i, f in enumerate(faces_in)}
        D = np.zeros((dim_out, dim_in), dtype=np.uint8)
        for fi, (T, a_idx) in enumerate(faces_out):
            r0, r1 = off_out[fi], off_out[fi + 1]
            for pos, j in enumerate(T):
                Tdn = tuple(x for x in T if x != j)
                adn = tuple(a for p, a in enumerate(a_idx) if p != pos)
                ci = idx_in[(Tdn, adn)]
                c0, c1 = off_in[ci], off_in[ci + 1]
                B = self._slot_matrix(T, j, a_idx[pos])
                D[r0:r1, c0:c1] ^= B
        self._deltas[k] = D
        return D

    def partial_matrix(self, k: int) -> np.ndarray:
        return self.delta_matrix(k - 1).T

    def enumerate_vectors(self, dim: int, nonzero_only=True):
        q = self.field.q
        if q**dim > 1 << 20:
            raise CubicalError("local state space too large to enumerate")
        for idx in range(1 if nonzero_only else 0, q**dim):
            v = np.zeros(dim, dtype=np.uint8)
            r = idx
            for i in range(dim):
                v[i] = r % q
                r //= q
            yield v

    def tensor_code_basis(self) -> np.ndarray:
        """Basis of (x)_{j in S} ker(h_j) in top-level coordinates."""
        kers = [lin.kernel(self.h[j], self.field) for j in self.S]
        if any(K.shape[0] == 0 for K in kers):
            return np.zeros((0, self.dim(len(self.S))), dtype=np.uint8)
        rows = []
        for combo in itertools.product(*[range(K.shape[0]) for K in kers]):
            vecs = [kers[i][c] for i, c in enumerate(combo)]
            rows.append(_kron_chain([v.reshape(1, -1) for v in vecs]).reshape(-1))
        return np.array(rows, dtype=np.uint8)


def local_robustness_bruteforce(S, h_list, k: int, field: FieldTable = GF2):
    """Exact kappa at level k: min over minimal nonzero x of |dx| / (n |x|).

    Minimality is decided by exhausting the coboundary image coset.
    Returns (kappa, argmin vector).
    """
    L = LocalComplex(S, h_list, field)
    D = L.delta_matrix(k)
    dim = L.dim(k)
    n = L.n
    img_vectors = [np.zeros(dim, dtype=np.uint8)]
    if k >= 1:
        Dp = L.delta_matrix(k - 1)
        basis, _ = lin.rref(Dp.T, field)
        basis = basis[~np.all(basis == 0, axis=1)]
        if field.q ** basis.shape[0] > 1 << 18:
            raise CubicalError("coboundary image too large to exhaust")
        img_vectors = []
        for combo in itertools.product(range(field.q), repeat=basis.shape[0]):
            acc = np.zeros(dim, dtype=np.uint8)
            for c, b in zip(combo, basis):
                if c:
                    acc ^= field.mul_table[np.uint8(c), b] if field.l > 1 else b
            img_vectors.append(acc)
    best = None
    arg = None
    for x in L.enumerate_vectors(dim):
        w = L.block_weight(x, k)
        minimal = all(L.block_weight(x ^ v, k) >= w for v in img_vectors)
        if not minimal:
            continue
        dw = L.block_weight(lin.matvec(D, x, field), k + 1)
        ratio = dw / (n * w)
        if best is None or ratio < best:
            best, arg = ratio, x.copy()
    if best is None:
        raise CubicalError("no minimal nonzero cochain (trivial space)")
    return best, arg


def local_exactness_report(S, h_list, field: FieldTable = GF2, trials: int = 50, seed: int = 0):
    """Boundary exactness below the top level; top-level kernel = tensor code.

    Exhaustive when the chain space is small, randomized otherwise.
    """
    L = LocalComplex(S, h_list, field)
    rng = np.random.default_rng(seed)
    top = len(L.S)
    results = {"exact_levels": {}, "tensor_kernel": None}
    for lvl in range(0, top):
        # chains z at level lvl with partial z = 0 (lvl = 0: boundary is trivial)
        dim = L.dim(lvl)
        P = L.partial_matrix(lvl) if lvl >= 1 else np.zeros((0, dim), dtype=np.uint8)
        Pup = L.partial_matrix(lvl + 1)
        ker = lin.kernel(P, field) if P.shape[0] else np.eye(dim, dtype=np.uint8)
        ok = True
        count = min(trials, field.q ** ker.shape[0])
        for _ in range(count):
            coeff = rng.integers(0, field.q, size=ker.shape[0]).astype(np.uint8)
            z = lin.matvec(ker.T, coeff, field)
            pre = lin.solve(Pup, z, field)
            ok &= pre is not None
        results["exact_levels"][lvl] = ok
    ker_top = lin.kernel(L.partial_matrix(top), field)
    tensor = L.tensor_code_basis()
    r1, _ = lin.rref(ker_top, field) if ker_top.shape[0] else (ker_top, [])
    r2, _ = lin.rref(tensor, field) if tensor.shape[0] else (tensor, [])
    r1 = r1[~np.all(r1 == 0, axis=1)] if ker_top.shape[0] else ker_top
    r2 = r2[~np.all(r2 == 0, axis=1)] if tensor.shape[0] else tensor
    results["tensor_kernel"] = (r1.shape == r2.shape) and np.array_equal(r1, r2)
    return results
