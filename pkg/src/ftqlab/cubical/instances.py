"""Named desk-scale complexes.

Abelian ground sets with shift generators keep commutation free.  The
`acceptance` instance was picked by an empirical search over groups and
local codes: the [3,1,3]-check local matrix has pairwise-independent
columns (unique same-direction local guesses) and its kernel code is the
repetition code, whose weight-3 contraction keeps the dual-side flip
decoding used inside the boundary decoder from stalling.
"""

from __future__ import annotations

import itertools

import numpy as np

from .complex import CubicalComplex
from .sheaf import SheafComplex

H_313_CHECK = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)
H_REPETITION3 = np.array([[1, 1, 1]], dtype=np.uint8)


def product_shift_perms(sizes, deltas):
    """Permutations of Z_{s1} x Z_{s2} x ... shifting by the given tuples."""
    N = 1
    for s in sizes:
        N *= s

    def idx(tup):
        v = 0
        for t, s in zip(tup, sizes):
            v = v * s + t
        return v

    perms = []
    for d in deltas:
        p = [0] * N
        for tup in itertools.product(*[range(s) for s in sizes]):
            p[idx(tup)] = idx(tuple((a + b) % s for a, b, s in zip(tup, d, sizes)))
        perms.append(p)
    return N, perms


def product_shift_complex(sizes, deltas_per_direction) -> CubicalComplex:
    first = product_shift_perms(sizes, deltas_per_direction[0])
    N = first[0]
    gen_sets = [first[1]]
    for deltas in deltas_per_direction[1:]:
        gen_sets.append(product_shift_perms(sizes, deltas)[1])
    return CubicalComplex(N, gen_sets)


def acceptance_sheaf() -> SheafComplex:
    """t = 2 over Z_4 x Z_4 with shifts {(1,0), (3,0), (0,2)} in both
    directions and the [3,1,3]-check local code: a [[384, 16]] code."""
    deltas = [(1, 0), (3, 0), (0, 2)]
    X = product_shift_complex([4, 4], [deltas, deltas])
    return SheafComplex(X, [H_313_CHECK, H_313_CHECK])


def small_sheaf() -> SheafComplex:
    """Tiny t = 2 instance for fast unit tests (Z_6, 144 qubits)."""
    deltas = [(1,), (5,), (3,)]
    X = product_shift_complex([6], [deltas, deltas])
    return SheafComplex(X, [H_313_CHECK, H_313_CHECK])


def random_block_error(sheaf: SheafComplex, k: int, w: int, rng) -> np.ndarray:
    """w random faces, each with a uniform nonzero block value."""
    faces, offsets, dim = sheaf.layout(k)
    e = np.zeros(dim, dtype=np.uint8)
    for fi in rng.choice(len(faces), size=w, replace=False):
        bd = offsets[fi + 1] - offsets[fi]
        val = np.zeros(bd, dtype=np.uint8)
        while not val.any():
            val = rng.integers(0, sheaf.field.q, size=bd).astype(np.uint8)
        e[offsets[fi]: offsets[fi + 1]] = val
    return e
