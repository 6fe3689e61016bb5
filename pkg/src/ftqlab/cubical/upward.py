"""Upward-view cochains: each i-face carries its opinion of the kappa-chains
above it, stored as a local-complex vector for the face's complement type.

Supplies the coboundary Delta (restriction-sum), the facewise local
boundary partial_L, their preimages (hypercube paths and local solves),
and extraction of a global chain from consistent vertex opinions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .. import lin
from .complex import CubicalError, Face
from .sheaf import LocalComplex, SheafComplex


class UpwardSpace:
    """Caches local complexes and index maps for one sheaf complex."""

    def __init__(self, sheaf: SheafComplex):
        self.sheaf = sheaf
        self.X = sheaf.X
        self._locals = {}
        self._restrict_maps = {}
        self._cube_matrices = {}

    def local(self, comp_type: tuple) -> LocalComplex:
        key = tuple(sorted(comp_type))
        if key not in self._locals:
            self._locals[key] = LocalComplex(key, {j: self.sheaf.h[j] for j in key},
                                             self.sheaf.field, n=self.X.n)
        return self._locals[key]

    def comp(self, f: Face) -> tuple:
        tf = set(f.type)
        return tuple(j for j in range(self.X.t) if j not in tf)

    def face_above(self, f: Face, T_local, a_tuple) -> Face:
        g = f.g
        spec = list(f.spec)
        for j, a in zip(T_local, a_tuple):
            if f.bit(j) == 1:
                g = self.X.apply_inv(j, a, g)
            spec[j] = ("a", a)
        return Face(g, tuple(spec))

    # -- global <-> local gathering ----------------------------------------
    def gather(self, vec_global, k_global: int, f: Face) -> np.ndarray:
        """Blocks of X_{>= f}(k_global) as a local C_{k_global - dim f} vector."""
        L = self.local(self.comp(f))
        lvl = k_global - f.dim
        faces, offsets, dim = L.layout(lvl)
        out = np.zeros(dim, dtype=np.uint8)
        gfaces, goffsets, _ = self.sheaf.layout(k_global)
        for li, (T, a) in enumerate(faces):
            u = self.face_above(f, T, a)
            gi = self.X.index(u)
            out[offsets[li]: offsets[li + 1]] = vec_global[goffsets[gi]: goffsets[gi + 1]]
        return out

    def scatter_add(self, vec_global, k_global: int, f: Face, local_vec):
        L = self.local(self.comp(f))
        lvl = k_global - f.dim
        faces, offsets, _ = L.layout(lvl)
        gfaces, goffsets, _ = self.sheaf.layout(k_global)
        for li, (T, a) in enumerate(faces):
            u = self.face_above(f, T, a)
            gi = self.X.index(u)
            vec_global[goffsets[gi]: goffsets[gi + 1]] ^= local_vec[offsets[li]: offsets[li + 1]]

    # -- restriction map for Delta ------------------------------------------
    def _restriction(self, comp_src: tuple, lvl: int, j: int, a_idx: int):
        """Index pairs mapping L_{comp_src} level-lvl faces containing (j, a)
        to L_{comp_src minus j} level-(lvl-1) faces."""
        key = (comp_src, lvl, j, a_idx)
        if key in self._restrict_maps:
            return self._restrict_maps[key]
        Ls = self.local(comp_src)
        comp_dst = tuple(x for x in comp_src if x != j)
        Ld = self.local(comp_dst)
        src_faces, src_off, _ = Ls.layout(lvl)
        dst_faces, dst_off, _ = Ld.layout(lvl - 1)
        dst_index = {fc: i for i, fc in enumerate(dst_faces)}
        pairs = []
        for si, (T, a) in enumerate(src_faces):
            if j not in T:
                continue
            pos = T.index(j)
            if a[pos] != a_idx:
                continue
            Td = tuple(x for x in T if x != j)
            ad = tuple(v for p, v in enumerate(a) if p != pos)
            di = dst_index[(Td, ad)]
            pairs.append((src_off[si], src_off[si + 1], dst_off[di], dst_off[di + 1]))
        self._restrict_maps[key] = pairs
        return pairs


@dataclass
class UpCochain:
    """Level-i cochain of the upward-view complex with parameter kappa."""

    space: UpwardSpace
    level: int
    kappa: int
    data: dict = field(default_factory=dict)  # Face -> local chain vector

    def copy(self):
        return UpCochain(self.space, self.level, self.kappa,
                         {f: v.copy() for f, v in self.data.items()})

    def prune(self):
        self.data = {f: v for f, v in self.data.items() if v.any()}
        return self

    def weight(self) -> int:
        return sum(1 for v in self.data.values() if v.any())

    def is_zero(self) -> bool:
        return all(not v.any() for v in self.data.values())

    def get(self, f: Face):
        L = self.space.local(self.space.comp(f))
        dim = L.dim(self.kappa - f.dim)
        return self.data.get(f, np.zeros(dim, dtype=np.uint8))

    def add_into(self, f: Face, vec):
        if f in self.data:
            self.data[f] = self.data[f] ^ vec
        else:
            self.data[f] = vec.copy()


def delta_up(y: UpCochain) -> UpCochain:
    """Sum of restricted opinions over the down-faces of each (i+1)-face."""
    sp = y.space
    out = UpCochain(sp, y.level + 1, y.kappa)
    for f, vec in y.data.items():
        if not vec.any():
            continue
        comp_src = sp.comp(f)
        lvl = y.kappa - f.dim
        for (j, fup) in sp.X.up(f):
            pairs = sp._restriction(comp_src, lvl, j, fup.a_index(j))
            L_dst = sp.local(sp.comp(fup))
            dst = out.data.get(fup)
            if dst is None:
                dst = np.zeros(L_dst.dim(y.kappa - fup.dim), dtype=np.uint8)
                out.data[fup] = dst
            for (s0, s1, d0, d1) in pairs:
                dst[d0:d1] ^= vec[s0:s1]
    return out.prune()


def partial_L(y: UpCochain) -> UpCochain:
    """Facewise local boundary: kappa drops by one, the level stays."""
    sp = y.space
    out = UpCochain(sp, y.level, y.kappa - 1)
    for f, vec in y.data.items():
        if not vec.any():
            continue
        L = sp.local(sp.comp(f))
        lvl = y.kappa - f.dim
        P = L.partial_matrix(lvl)
        out.data[f] = lin.matvec(P, vec, sp.sheaf.field)
    return out.prune()


def partial_L_preimage(z: UpCochain, strict: bool = True) -> tuple:
    """y with partial_L(y) = z, facewise; |y| <= |z| blockwise.

    Returns (y, clean): faces with no local preimage get zero and flip
    clean to False (the noisy-mode modification) unless strict.
    """
    sp = z.space
    out = UpCochain(sp, z.level, z.kappa + 1)
    clean = True
    for f, vec in z.data.items():
        if not vec.any():
            continue
        L = sp.local(sp.comp(f))
        lvl = z.kappa - f.dim
        P = L.partial_matrix(lvl + 1)
        sol = lin.solve(P, vec, sp.sheaf.field)
        if sol is None:
            if strict:
                raise CubicalError("no local boundary preimage")
            clean = False
            continue
        out.data[f] = sol
    return out.prune(), clean


def _cube_incidence(space: UpwardSpace, w_type: tuple, r: int):
    """Hypercube coboundary matrix (level r-1 -> r) inside one |type|-cube.

    Faces keyed combinatorially by (dropped directions, bits); identical
    for every face of the given type.
    """
    key = (w_type, r)
    if key in space._cube_matrices:
        return space._cube_matrices[key]
    dimw = len(w_type)

    def cube_faces(level):
        drop = dimw - level
        out = []
        for D in itertools.combinations(w_type, drop):
            for bits in itertools.product((0, 1), repeat=drop):
                out.append((D, bits))
        return out

    rows = cube_faces(r)
    cols = cube_faces(r - 1)
    col_index = {c: i for i, c in enumerate(cols)}
    M = np.zeros((len(rows), len(cols)), dtype=np.uint8)
    for ri, (D, bits) in enumerate(rows):
        # a level-(r-1) subface drops one more direction j with either bit
        for j in w_type:
            if j in D:
                continue
            for b in (0, 1):
                D2 = tuple(sorted(D + (j,)))
                bits2 = []
                for d in D2:
                    if d == j:
                        bits2.append(b)
                    else:
                        bits2.append(bits[D.index(d)])
                M[ri, col_index[(D2, tuple(bits2))]] ^= 1
    space._cube_matrices[key] = (rows, cols, M)
    return space._cube_matrices[key]


def _cube_face_to_global(space: UpwardSpace, w: Face, D, bits) -> Face:
    g = w.g
    spec = list(w.spec)
    for pos, j in enumerate(D):
        if bits[pos] == 1:
            g = space.X.apply(j, w.a_index(j), g)
        spec[j] = ("b", bits[pos])
    return Face(g, tuple(spec))


def _local_key_index(space: UpwardSpace, f: Face, w: Face):
    """Slice of f's local vector holding the opinion about w (f <= w)."""
    L = space.local(space.comp(f))
    T = tuple(j for j in w.type if j not in f.type)
    a = tuple(w.a_index(j) for j in T)
    lvl = w.dim - f.dim
    faces, offsets, _ = L.layout(lvl)
    li = faces.index((T, a))
    return offsets[li], offsets[li + 1]


def delta_up_preimage(y: UpCochain, strict: bool = True) -> tuple:
    """u at level r-1 with delta_up(u) = y, solved cube by cube.

    Faces of X(kappa) whose cube system is inconsistent contribute zero
    (noisy mode) unless strict.
    """
    sp = y.space
    r = y.level
    if r < 1:
        raise CubicalError("no level below 0")
    out = UpCochain(sp, r - 1, y.kappa)
    clean = True
    touched = set()
    for f in y.data:
        for w in sp.X.up_faces_of(f, y.kappa):
            touched.add(w)
    for w in touched:
        rows, cols, M = _cube_incidence(sp, w.type, r)
        # V_w components as multiple right-hand sides
        vdim = sp.sheaf.block_dim(w.type)
        rhs = np.zeros((len(rows), vdim), dtype=np.uint8)
        for ri, (D, bits) in enumerate(rows):
            f = _cube_face_to_global(sp, w, D, bits)
            if f in y.data:
                s0, s1 = _local_key_index(sp, f, w)
                rhs[ri] = y.data[f][s0:s1]
        if not rhs.any():
            continue
        sol = lin.solve(M, rhs, sp.sheaf.field)
        if sol is None:
            if strict:
                raise CubicalError("cube system inconsistent")
            clean = False
            continue
        for ci, (D, bits) in enumerate(cols):
            if not sol[ci].any():
                continue
            f2 = _cube_face_to_global(sp, w, D, bits)
            L2 = sp.local(sp.comp(f2))
            vec = out.data.get(f2)
            if vec is None:
                vec = np.zeros(L2.dim(y.kappa - f2.dim), dtype=np.uint8)
                out.data[f2] = vec
            s0, s1 = _local_key_index(sp, f2, w)
            vec[s0:s1] ^= sol[ci]
    return out.prune(), clean


def extract_chain(g0: UpCochain, strict: bool = True) -> tuple:
    """Global kappa-chain from consistent vertex opinions.

    Inconsistent faces become zero in noisy mode (strict=False).
    """
    sp = g0.space
    if g0.level != 0:
        raise CubicalError("extraction starts from vertex opinions")
    k = g0.kappa
    faces, offsets, dim = sp.sheaf.layout(k)
    out = np.zeros(dim, dtype=np.uint8)
    clean = True
    for gi, u in enumerate(faces):
        vals = []
        for v in sp.X.down_faces_of(u, 0):
            s0, s1 = _local_key_index(sp, v, u)
            vals.append(g0.get(v)[s0:s1])
        first = vals[0]
        if any(not np.array_equal(first, w) for w in vals[1:]):
            if strict:
                raise CubicalError("inconsistent local views")
            clean = False
            continue
        out[offsets[gi]: offsets[gi + 1]] = first
    return out, clean


def views_of_global(sp: UpwardSpace, vec_global, k: int) -> UpCochain:
    """Vertex local views of a global level-k vector (level-0 upward cochain)."""
    out = UpCochain(sp, 0, k)
    for v in sp.X.vertices():
        loc = sp.gather(vec_global, k, v)
        if loc.any():
            out.data[v] = loc
    return out
