"""t-dimensional cubical complexes from commuting permutation sets.

A face is a tuple [g; spec] where spec assigns each direction either an
orientation bit or a generator index.  Faces are identified with their
tuples (no geometric quotient), matching the counting
|X(k)| = C(t,k) 2^(t-k) n^k |G|.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np


class CubicalError(Exception):
    pass


@dataclass(frozen=True)
class Face:
    g: int
    spec: tuple  # per direction: ("b", bit) or ("a", generator index)

    @property
    def type(self) -> tuple:
        return tuple(i for i, (tag, _) in enumerate(self.spec) if tag == "a")

    @property
    def dim(self) -> int:
        return sum(1 for tag, _ in self.spec if tag == "a")

    def bit(self, j):
        tag, v = self.spec[j]
        if tag != "b":
            raise CubicalError("direction carries a generator, not a bit")
        return v

    def a_index(self, j):
        tag, v = self.spec[j]
        if tag != "a":
            raise CubicalError("direction carries a bit, not a generator")
        return v


class CubicalComplex:
    """Ground set [N] with t symmetric, cross-commuting permutation sets."""

    def __init__(self, N: int, gen_sets):
        self.N = N
        self.t = len(gen_sets)
        self.A = [[np.asarray(p, dtype=np.int64) for p in gens] for gens in gen_sets]
        self.n = len(self.A[0])
        if any(len(gens) != self.n for gens in self.A):
            raise CubicalError("all generator sets must share one cardinality")
        self._inv_index = []
        for gens in self.A:
            inv_idx = []
            keys = [tuple(p) for p in gens]
            for p in gens:
                inv = tuple(int(v) for v in np.argsort(p))
                if inv not in keys:
                    raise CubicalError("generator set not closed under inverse")
                inv_idx.append(keys.index(inv))
            self._inv_index.append(inv_idx)
        for i in range(self.t):
            for j in range(i + 1, self.t):
                for a in self.A[i]:
                    for b in self.A[j]:
                        if not np.array_equal(a[b], b[a]):
                            raise CubicalError(f"generators in directions {i},{j} do not commute")
        self._faces = {}
        self._index = {}

    @classmethod
    def cyclic_shifts(cls, N: int, shifts_per_direction):
        """Abelian instance: G = Z_N with shift sets per direction."""
        gen_sets = []
        for shifts in shifts_per_direction:
            gens = []
            for s in shifts:
                gens.append(np.array([(g + s) % N for g in range(N)], dtype=np.int64))
            gen_sets.append(gens)
        return cls(N, gen_sets)

    # -- enumeration ----------------------------------------------------
    def faces(self, k: int):
        if k not in self._faces:
            out = []
            for S in itertools.combinations(range(self.t), k):
                rest = [j for j in range(self.t) if j not in S]
                for bits in itertools.product((0, 1), repeat=len(rest)):
                    for a_idx in itertools.product(range(self.n), repeat=k):
                        for g in range(self.N):
                            spec = [None] * self.t
                            for pos, j in enumerate(S):
                                spec[j] = ("a", a_idx[pos])
                            for pos, j in enumerate(rest):
                                spec[j] = ("b", bits[pos])
                            out.append(Face(g, tuple(spec)))
            self._faces[k] = out
            self._index[k] = {f: i for i, f in enumerate(out)}
        return self._faces[k]

    def face_count(self, k: int) -> int:
        return comb(self.t, k) * 2 ** (self.t - k) * self.n**k * self.N

    def index(self, f: Face) -> int:
        self.faces(f.dim)
        return self._index[f.dim][f]

    # -- incidence --------------------------------------------------------
    def apply(self, j, a_idx, g):
        return int(self.A[j][a_idx][g])

    def apply_inv(self, j, a_idx, g):
        return int(self.A[j][self._inv_index[j][a_idx]][g])

    def down(self, f: Face):
        """[(j, f')], two faces per direction of f's type."""
        out = []
        for j in f.type:
            a_idx = f.a_index(j)
            spec0 = list(f.spec)
            spec0[j] = ("b", 0)
            out.append((j, Face(f.g, tuple(spec0))))
            spec1 = list(f.spec)
            spec1[j] = ("b", 1)
            out.append((j, Face(self.apply(j, a_idx, f.g), tuple(spec1))))
        return out

    def up(self, f: Face):
        """[(j, f')], n faces per free direction."""
        out = []
        for j in range(self.t):
            tag, bit = f.spec[j]
            if tag == "a":
                continue
            for a_idx in range(self.n):
                g2 = f.g if bit == 0 else self.apply_inv(j, a_idx, f.g)
                spec = list(f.spec)
                spec[j] = ("a", a_idx)
                out.append((j, Face(g2, tuple(spec))))
        return out

    def face_geq(self, upper: Face, lower: Face) -> bool:
        """upper >= lower in the face order."""
        tu, tl = set(upper.type), set(lower.type)
        if not tl <= tu:
            return False
        for j in tl:
            if upper.spec[j] != lower.spec[j]:
                return False
        for j in range(self.t):
            if j not in tu and upper.spec[j] != lower.spec[j]:
                return False
        g = upper.g
        for j in tu - tl:
            if lower.bit(j) == 1:
                g = self.apply(j, upper.a_index(j), g)
        return g == lower.g

    def up_faces_of(self, lower: Face, k: int):
        """X_{>= lower}(k) in canonical (free-type, a-tuple) order."""
        free_all = [j for j in range(self.t) if j not in lower.type]
        out = []
        need = k - lower.dim
        if need < 0:
            return out
        for T in itertools.combinations(free_all, need):
            for a_idx in itertools.product(range(self.n), repeat=need):
                g = lower.g
                spec = list(lower.spec)
                for pos, j in enumerate(T):
                    if lower.bit(j) == 1:
                        g = self.apply_inv(j, a_idx[pos], g)
                    spec[j] = ("a", a_idx[pos])
                out.append(Face(g, tuple(spec)))
        return out

    def down_faces_of(self, upper: Face, k: int):
        """X_{<= upper}(k) in canonical (kept-type, bits) order."""
        S = upper.type
        drop = len(S) - k
        out = []
        if drop < 0:
            return out
        for D in itertools.combinations(S, drop):
            for bits in itertools.product((0, 1), repeat=drop):
                g = upper.g
                spec = list(upper.spec)
                for pos, j in enumerate(D):
                    if bits[pos] == 1:
                        g = self.apply(j, upper.a_index(j), g)
                    spec[j] = ("b", bits[pos])
                out.append(Face(g, tuple(spec)))
        return out

    def vertices(self):
        return self.faces(0)
