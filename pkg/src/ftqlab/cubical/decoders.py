"""Small-set-flip decoders on sheaf complexes.

Sequential and parallel flip decoders for syndromes of the coboundary
(level-k cochains), and the reduction-based decoder for syndromes of
the boundary, which traces local-guess inconsistencies up the complex,
decodes on the dual sheaf, and reverses the explanation sequence.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .. import lin
from .complex import CubicalError
from .sheaf import SheafComplex, _kron_chain
from .upward import (
    UpCochain,
    UpwardSpace,
    delta_up,
    delta_up_preimage,
    extract_chain,
    partial_L,
    partial_L_preimage,
)

FLIP_CAP_BITS = 20


class _ZContext:
    """Per-(sheaf, k) tables: flip candidates, their local coboundaries,
    per-vertex coordinate maps, neighbor lists."""

    def __init__(self, sheaf: SheafComplex, k: int):
        self.sheaf = sheaf
        self.k = k
        X = sheaf.X
        self.space = UpwardSpace(sheaf)
        L = self.space.local(tuple(range(X.t)))
        self.L = L
        d = L.dim(k)
        q = sheaf.field.q
        if q**d > 1 << FLIP_CAP_BITS:
            raise CubicalError("local flip space exceeds the enumeration cap")
        ncand = q**d - 1
        W = np.zeros((ncand, d), dtype=np.uint8)
        for idx in range(1, q**d):
            r = idx
            for i in range(d):
                W[idx - 1, i] = r % q
                r //= q
        self.W = W
        D = L.delta_matrix(k)
        self.DW = lin.matmul(W, D.T, sheaf.field)
        _, off1, _ = L.layout(k + 1)
        self.off1 = off1
        nz = self.DW != 0
        self.DW_blocks = np.add.reduceat(nz, off1[:-1], axis=1) > 0
        self.DW_weight = self.DW_blocks.sum(axis=1)

        # per-vertex flat coordinate maps
        self.vertices = X.vertices()
        gfaces_k, goff_k, _ = sheaf.layout(k)
        gfaces_k1, goff_k1, _ = sheaf.layout(k + 1)
        self.idx_k = []
        self.idx_k1 = []
        for v in self.vertices:
            cols = []
            for u in X.up_faces_of(v, k):
                gi = X.index(u)
                cols.extend(range(goff_k[gi], goff_k[gi + 1]))
            self.idx_k.append(np.array(cols, dtype=np.int64))
            cols = []
            for u in X.up_faces_of(v, k + 1):
                gi = X.index(u)
                cols.extend(range(goff_k1[gi], goff_k1[gi + 1]))
            self.idx_k1.append(np.array(cols, dtype=np.int64))
        # neighbors: vertices sharing a (k+1)-face
        vindex = {v: i for i, v in enumerate(self.vertices)}
        face_verts = {}
        for f in X.faces(k + 1):
            face_verts[f] = [vindex[v] for v in X.down_faces_of(f, 0)]
        self.neighbors = [set() for _ in self.vertices]
        for v in self.vertices:
            vi = vindex[v]
            for u in X.up_faces_of(v, k + 1):
                self.neighbors[vi].update(face_verts[u])
        self.neighbors = [sorted(s) for s in self.neighbors]

    def sigma_blocks(self, sigma_loc):
        nz = sigma_loc != 0
        return np.add.reduceat(nz, self.off1[:-1]) > 0


def _z_context(sheaf: SheafComplex, k: int) -> _ZContext:
    cache = getattr(sheaf, "_z_ctx", None)
    if cache is None:
        cache = {}
        sheaf._z_ctx = cache
    if k not in cache:
        cache[k] = _ZContext(sheaf, k)
    return cache[k]


@dataclass
class DecoderRun:
    correction: np.ndarray
    syndrome_final: np.ndarray
    flips: list
    syndrome_weights: list
    monotone: bool
    iterations: int

    @property
    def cleared(self) -> bool:
        return not self.syndrome_final.any()


def z_decode_seq(sheaf: SheafComplex, k: int, syndrome, eps: float = 1.0) -> DecoderRun:
    """Sequential flip decoding: accept a local flip w at a vertex when
    |sigma| - |sigma + delta w| > (1 - eps) |delta w| (block weights)."""
    if not 0 < eps <= 1:
        raise CubicalError("eps must lie in (0, 1]")
    ctx = _z_context(sheaf, k)
    sigma = np.asarray(syndrome, dtype=np.uint8).copy()
    e = np.zeros(sheaf.dim(k), dtype=np.uint8)
    weights = [sheaf.block_weight(sigma, k + 1)]
    flips = []
    monotone = True
    nv = len(ctx.vertices)
    inqueue = [True] * nv
    work = deque(range(nv))
    iterations = 0
    while work:
        vi = work.popleft()
        inqueue[vi] = False
        sigma_loc = sigma[ctx.idx_k1[vi]]
        if not sigma_loc.any():
            continue
        sblocks = ctx.sigma_blocks(sigma_loc)
        w_before = int(sblocks.sum())
        new_blocks = np.add.reduceat((sigma_loc[None, :] ^ ctx.DW) != 0, ctx.off1[:-1], axis=1) > 0
        decrease = w_before - new_blocks.sum(axis=1)
        ok = decrease > (1 - eps) * ctx.DW_weight
        if not ok.any():
            continue
        cand_idx = np.nonzero(ok)[0]
        best = cand_idx[np.argmax(decrease[cand_idx])]
        e[ctx.idx_k[vi]] ^= ctx.W[best]
        sigma[ctx.idx_k1[vi]] ^= ctx.DW[best]
        iterations += 1
        monotone &= bool(decrease[best] > 0)
        weights.append(weights[-1] - int(decrease[best]))
        flips.append((vi, int(best)))
        for u in ctx.neighbors[vi]:
            if not inqueue[u]:
                inqueue[u] = True
                work.append(u)
    return DecoderRun(e, sigma, flips, weights, monotone, iterations)


def vertex_coloring(sheaf: SheafComplex, k: int):
    """Greedy coloring of the link-conflict graph; at most (4n)^t + 1 colors."""
    ctx = _z_context(sheaf, k)
    nv = len(ctx.vertices)
    color = [-1] * nv
    for vi in range(nv):
        used = {color[u] for u in ctx.neighbors[vi] if color[u] >= 0}
        c = 0
        while c in used:
            c += 1
        color[vi] = c
    chi = max(color) + 1
    bound = (4 * sheaf.X.n) ** sheaf.X.t + 1
    if chi > bound:
        raise CubicalError("coloring exceeded the (4n)^t + 1 budget")
    classes = [[] for _ in range(chi)]
    for vi, c in enumerate(color):
        classes[c].append(vi)
    return classes


def z_decode_par(sheaf: SheafComplex, k: int, syndrome, rounds: int = 1) -> DecoderRun:
    """Parallel flip decoding: per color class, each vertex takes the
    maximal-coboundary flip with |sigma| - |sigma + delta w| >= |delta w|/2;
    disjoint links let a class apply simultaneously."""
    ctx = _z_context(sheaf, k)
    classes = vertex_coloring(sheaf, k)
    sigma = np.asarray(syndrome, dtype=np.uint8).copy()
    e = np.zeros(sheaf.dim(k), dtype=np.uint8)
    weights = [sheaf.block_weight(sigma, k + 1)]
    flips = []
    iterations = 0
    monotone = True
    for _ in range(rounds):
        if not sigma.any():
            break
        for cls in classes:
            if not sigma.any():
                break
            chosen = []
            for vi in cls:
                sigma_loc = sigma[ctx.idx_k1[vi]]
                if not sigma_loc.any():
                    continue
                w_before = int(ctx.sigma_blocks(sigma_loc).sum())
                new_blocks = np.add.reduceat(
                    (sigma_loc[None, :] ^ ctx.DW) != 0, ctx.off1[:-1], axis=1) > 0
                decrease = w_before - new_blocks.sum(axis=1)
                ok = (2 * decrease) >= ctx.DW_weight
                ok &= ctx.DW_weight > 0
                ok &= decrease > 0
                if not ok.any():
                    continue
                cand_idx = np.nonzero(ok)[0]
                best = cand_idx[np.argmax(ctx.DW_weight[cand_idx])]
                chosen.append((vi, int(best), int(decrease[best])))
            before = weights[-1]
            for vi, best, dec in chosen:
                e[ctx.idx_k[vi]] ^= ctx.W[best]
                sigma[ctx.idx_k1[vi]] ^= ctx.DW[best]
                flips.append((vi, best))
                iterations += 1
            after = sheaf.block_weight(sigma, k + 1)
            monotone &= after <= before
            weights.append(after)
    return DecoderRun(e, sigma, flips, weights, monotone, iterations)


# ---------------------------------------------------------------------------
# boundary-syndrome decoder (reduction to the dual complex)
# ---------------------------------------------------------------------------


class _XContext:
    """Local-guess tables: minimal chain per local boundary image."""

    def __init__(self, sheaf: SheafComplex, k: int):
        self.sheaf = sheaf
        self.k = k
        self.space = UpwardSpace(sheaf)
        X = sheaf.X
        L = self.space.local(tuple(range(X.t)))
        self.L = L
        d = L.dim(k)
        q = sheaf.field.q
        if q**d > 1 << FLIP_CAP_BITS:
            raise CubicalError("local guess space exceeds the enumeration cap")
        cands = [np.zeros(d, dtype=np.uint8)]
        for idx in range(1, q**d):
            v = np.zeros(d, dtype=np.uint8)
            r = idx
            for i in range(d):
                v[i] = r % q
                r //= q
            cands.append(v)
        P = L.partial_matrix(k)
        order = sorted(range(len(cands)),
                       key=lambda i: (L.block_weight(cands[i], k), i))
        self.lookup = {}
        for i in order:
            key = lin.matvec(P, cands[i], sheaf.field).tobytes()
            if key not in self.lookup:
                self.lookup[key] = cands[i]
        self.vertices = X.vertices()
        gfaces, goff, _ = sheaf.layout(k - 1)
        self.idx_km1 = []
        for v in self.vertices:
            cols = []
            for u in X.up_faces_of(v, k - 1):
                gi = X.index(u)
                cols.extend(range(goff[gi], goff[gi + 1]))
            self.idx_km1.append(np.array(cols, dtype=np.int64))


def _x_context(sheaf: SheafComplex, k: int) -> _XContext:
    cache = getattr(sheaf, "_x_ctx", None)
    if cache is None:
        cache = {}
        sheaf._x_ctx = cache
    if k not in cache:
        cache[k] = _XContext(sheaf, k)
    return cache[k]


def _tensor_encoder(space: UpwardSpace, comp_type: tuple):
    """kron_{j in comp} (h_j^perp)^T: messages -> top-level local chains."""
    key = ("enc", comp_type)
    if key not in space._cube_matrices:
        mats = []
        for j in comp_type:
            hp = lin.kernel(space.sheaf.h[j], space.sheaf.field)
            mats.append(hp.T.copy())
        space._cube_matrices[key] = _kron_chain(mats) if mats else np.ones((1, 1), dtype=np.uint8)
    return space._cube_matrices[key]


@dataclass
class XDecoderRun:
    correction: np.ndarray
    clean: bool
    used_dual_decoder: bool
    dual_run: DecoderRun | None
    stopped_at: int
    syndrome_matched: bool


def x_decode(sheaf: SheafComplex, k: int, syndrome, mode: str = "seq", rounds: int = 1,
             noisy: bool = False, early_exit: bool | None = None) -> XDecoderRun:
    """Decode a boundary syndrome sigma = partial_k(e).

    Pipeline: per-vertex minimal local guesses; syndrome-explanation trace
    through the upward-view complexes; on residual inconsistency, unencode
    the top-level tensor blocks into the dual sheaf, run the flip decoder
    there, re-encode; reverse the explanation sequence and extract a global
    chain.  noisy mode zero-fills every unsolvable local step.
    """
    t = sheaf.X.t
    if not 1 <= k <= t - 1:
        raise CubicalError("level must satisfy 1 <= k <= t-1")
    if early_exit is None:
        early_exit = not noisy
    ctx = _x_context(sheaf, k)
    sp = ctx.space
    sigma = np.asarray(syndrome, dtype=np.uint8)
    clean = True

    # step 1: local guesses
    g0 = UpCochain(sp, 0, k)
    for vi, v in enumerate(ctx.vertices):
        s_loc = sigma[ctx.idx_km1[vi]]
        if not s_loc.any():
            continue
        w = ctx.lookup.get(s_loc.tobytes())
        if w is None:
            clean = False  # noisy-mode modification: g_v = 0
            continue
        g0.data[v] = w.copy()
    g0.prune()

    # step 2: syndrome explanation sequence
    gs = [g0]
    r_stop = None
    sigma_up = delta_up(g0)  # level 1, kappa = k
    for i in range(1, t - k + 1):
        if early_exit and sigma_up.is_zero():
            r_stop = i - 1
            break
        g_i, ok = partial_L_preimage(sigma_up, strict=False)
        clean &= ok
        gs.append(g_i)
        sigma_up = delta_up(g_i)  # level i+1, kappa = k+i
    used_dual = False
    dual_run = None
    if r_stop is None:
        if sigma_up.is_zero():
            r_stop = t - k
        else:
            # step 3: unencode to the dual sheaf and flip-decode there
            used_dual = True
            dual = sheaf.dual()
            dfaces, doff, ddim = dual.layout(t - k + 1)
            sig_dual = np.zeros(ddim, dtype=np.uint8)
            for f, vec in sigma_up.data.items():
                E = _tensor_encoder(sp, sp.comp(f))
                msg = lin.solve(E, vec, sheaf.field)
                if msg is None:
                    clean = False  # not a tensor codeword: dropped
                    continue
                gi = sheaf.X.index(f)
                sig_dual[doff[gi]: doff[gi + 1]] = msg
            if mode == "seq":
                dual_run = z_decode_seq(dual, t - k, sig_dual, eps=1.0)
            else:
                dual_run = z_decode_par(dual, t - k, sig_dual, rounds=rounds)
            clean &= dual_run.cleared
            # re-encode the dual correction as a level-(t-k) upward cochain
            w_corr = UpCochain(sp, t - k, t)
            cfaces, coff, _ = dual.layout(t - k)
            for gi2, f in enumerate(cfaces):
                msg = dual_run.correction[coff[gi2]: coff[gi2 + 1]]
                if not msg.any():
                    continue
                E = _tensor_encoder(sp, sp.comp(f))
                w_corr.data[f] = lin.matvec(E, msg, sheaf.field)
            g_last = gs[t - k].copy()
            for f, vec in w_corr.data.items():
                g_last.add_into(f, vec)
            gs[t - k] = g_last.prune()
            r_stop = t - k

    # step 4: reverse the explanation sequence
    g_prime = gs[r_stop]
    for r in range(r_stop, 0, -1):
        u, ok = delta_up_preimage(g_prime, strict=False)
        clean &= ok
        step = partial_L(u)
        g_prev = gs[r - 1].copy()
        for f, vec in step.data.items():
            g_prev.add_into(f, vec)
        g_prime = g_prev.prune()

    g, ok = extract_chain(g_prime, strict=False)
    clean &= ok
    matched = np.array_equal(lin.matvec(sheaf.partial_matrix(k), g, sheaf.field), sigma)
    return XDecoderRun(g, clean, used_dual, dual_run, r_stop, matched)


# ---------------------------------------------------------------------------
# homology checks and reduced weights
# ---------------------------------------------------------------------------


def coboundary_equivalent(sheaf: SheafComplex, k: int, a, b) -> bool:
    """a and b differ by an element of image(delta^{k-1})."""
    diff = np.asarray(a, dtype=np.uint8) ^ np.asarray(b, dtype=np.uint8)
    if not diff.any():
        return True
    if k == 0:
        return False
    D = sheaf.delta_matrix(k - 1)
    return lin.solve(D, diff, sheaf.field) is not None


def boundary_equivalent(sheaf: SheafComplex, k: int, a, b) -> bool:
    """a and b differ by an element of image(partial_{k+1})."""
    diff = np.asarray(a, dtype=np.uint8) ^ np.asarray(b, dtype=np.uint8)
    if not diff.any():
        return True
    if k == sheaf.X.t:
        return False
    P = sheaf.partial_matrix(k + 1)
    return lin.solve(P, diff, sheaf.field) is not None


def colm_reduce(sheaf: SheafComplex, k: int, vec) -> np.ndarray:
    """Greedy co-locally-minimal representative: vertex-local coboundary
    flips while they strictly lower the block weight (upper bound on the
    stabilizer-reduced weight)."""
    if k == 0:
        return np.asarray(vec, dtype=np.uint8).copy()
    ctx = _z_context(sheaf, k - 1)  # flips at level k-1 feed coboundaries into k
    cur = np.asarray(vec, dtype=np.uint8).copy()
    improved = True
    while improved:
        improved = False
        for vi in range(len(ctx.vertices)):
            loc = cur[ctx.idx_k1[vi]]
            w_before = int(ctx.sigma_blocks(loc).sum())
            if w_before == 0:
                continue
            new_blocks = np.add.reduceat((loc[None, :] ^ ctx.DW) != 0, ctx.off1[:-1], axis=1) > 0
            dec = w_before - new_blocks.sum(axis=1)
            best = int(np.argmax(dec))
            if dec[best] > 0:
                cur[ctx.idx_k1[vi]] ^= ctx.DW[best]
                improved = True
    return cur


def reduced_weight(sheaf: SheafComplex, k: int, vec, image: str = "coboundary",
                   exact_cap: int = 20):
    """(weight, exact) block weight modulo the stabilizer image.

    Exact when the image dimension fits the enumeration cap; otherwise a
    greedy co-LM upper bound labeled exact=False.
    """
    vec = np.asarray(vec, dtype=np.uint8)
    if image == "coboundary":
        M = sheaf.delta_matrix(k - 1) if k >= 1 else np.zeros((sheaf.dim(k), 0), dtype=np.uint8)
        gens = M.T
    else:
        M = sheaf.partial_matrix(k + 1) if k < sheaf.X.t else np.zeros((sheaf.dim(k), 0), dtype=np.uint8)
        gens = M.T
    basis, _ = lin.rref(gens, sheaf.field)
    basis = basis[~np.all(basis == 0, axis=1)] if basis.size else basis.reshape(0, sheaf.dim(k))
    rankd = basis.shape[0]
    if sheaf.field.q ** rankd <= 1 << exact_cap:
        best = sheaf.block_weight(vec, k)
        import itertools as it

        for combo in it.product(range(sheaf.field.q), repeat=rankd):
            acc = vec.copy()
            for c, b in zip(combo, basis):
                if c:
                    acc = acc ^ (sheaf.field.mul_table[np.uint8(c), b] if sheaf.field.l > 1 else b)
            w = sheaf.block_weight(acc, k)
            if w < best:
                best = w
        return best, True
    if image == "coboundary":
        red = colm_reduce(sheaf, k, vec)
        return sheaf.block_weight(red, k), False
    return sheaf.block_weight(vec, k), False
