"""CSS codes, canonical logicals, constant-depth encoding, syndrome circuits.

The canonical logical basis comes from simultaneous RREF of the two
check matrices after a column permutation placing H_X pivots last and
H_Z pivots in the middle; logicals then split as a single-qubit Pauli on
the information block, an X-string on the H_Z-pivot block, and a
Z-string on the H_X-pivot block (possibly trivial).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import networkx as nx
import numpy as np

from .gfq import GF2, FieldTable
from . import lin
from .pauli import Circuit, Op, PauliOp, StabilizerTableau, run_tableau


class CssError(Exception):
    pass


class CssCode:
    """CSS(H_X, H_Z) over a common field with hx . hz^T = 0."""

    def __init__(self, hx, hz, field: FieldTable = GF2, name: str = ""):
        self.field = field
        self.hx = np.atleast_2d(np.asarray(hx, dtype=np.uint8))
        self.hz = np.atleast_2d(np.asarray(hz, dtype=np.uint8))
        if self.hx.size == 0:
            self.hx = self.hx.reshape(0, self.hz.shape[1])
        if self.hz.size == 0:
            self.hz = self.hz.reshape(0, self.hx.shape[1])
        if self.hx.shape[1] != self.hz.shape[1]:
            raise CssError("hx/hz column mismatch")
        self.n = self.hx.shape[1]
        if lin.matmul(self.hx, self.hz.T, field).any():
            raise CssError("hx . hz^T != 0")
        self.rank_x = lin.rank(self.hx, field)
        self.rank_z = lin.rank(self.hz, field)
        self.k = self.n - self.rank_x - self.rank_z
        self.name = name
        self._canonical = None

    def __repr__(self):
        return f"CssCode[[{self.n},{self.k}]]_{self.field.q}{' ' + self.name if self.name else ''}"

    @property
    def delta(self) -> int:
        """LDPC locality: max row/column weight over both checks."""
        vals = []
        for H in (self.hx, self.hz):
            if H.shape[0]:
                vals.append(int((H != 0).sum(axis=1).max()))
                vals.append(int((H != 0).sum(axis=0).max()))
        return max(vals) if vals else 0

    def to_json(self):
        return {
            "field_l": self.field.l,
            "hx": [[int(v) for v in row] for row in self.hx],
            "hz": [[int(v) for v in row] for row in self.hz],
        }

    @classmethod
    def from_json(cls, obj):
        from .gfq import get_field

        return cls(np.array(obj["hx"], dtype=np.uint8), np.array(obj["hz"], dtype=np.uint8),
                   get_field(obj["field_l"]))


@dataclass
class CanonicalLogicals:
    perm: list               # canonical order: [info block | hz pivots | hx pivots]
    logical_x: list          # PauliOp per logical, original qubit order
    logical_z: list
    mz_block: list           # hz pivot columns (prepared |+>)
    mx_block: list           # hx pivot columns (prepared |0>)
    info_block: list


def canonical_logicals(code: CssCode) -> CanonicalLogicals:
    """Split-form logical operators (cached on the code object)."""
    if code._canonical is not None:
        return code._canonical
    f = code.field
    n = code.n
    # RREF in original order puts an identity on hx's pivot columns
    Rx, piv_x = lin.rref(code.hx, f)
    Rx = Rx[: len(piv_x)]
    # hz pivots must avoid hx pivot columns; rref on the complement
    rest = [c for c in range(n) if c not in piv_x]
    if code.hz.shape[0]:
        _, piv_z_sub = lin.rref(code.hz[:, rest], f)
        piv_z = [rest[c] for c in piv_z_sub]
    else:
        piv_z = []
    if len(piv_z) != code.rank_z:
        raise CssError("hz rank collapses on the complement of hx pivots (malformed input)")
    info = [c for c in range(n) if c not in piv_x and c not in piv_z]
    perm = info + piv_z + piv_x
    k, mz, mx = len(info), len(piv_z), len(piv_x)
    if k != code.k:
        raise CssError("rank bookkeeping broken")
    # reduce hz with its pivot columns first so they carry the identity
    orderz = piv_z + [c for c in range(n) if c not in piv_z]
    if code.hz.shape[0]:
        Rz, pz = lin.rref(code.hz[:, orderz], f)
        Rz = Rz[: len(pz)]
        if pz != list(range(mz)):
            raise CssError("hz pivot bookkeeping broken")
        colz = {c: orderz.index(c) for c in info}
    else:
        Rz, colz = np.zeros((0, n), dtype=np.uint8), {}

    logical_x, logical_z = [], []
    for i in range(k):
        xv = np.zeros(n, dtype=np.uint8)
        zv = np.zeros(n, dtype=np.uint8)
        xv[info[i]] = 1
        for j in range(mz):  # X-string on the H_Z pivot block
            xv[piv_z[j]] = Rz[j, colz[info[i]]]
        logical_x.append(PauliOp(xv, zv.copy(), f))
        xv2 = np.zeros(n, dtype=np.uint8)
        zv2 = np.zeros(n, dtype=np.uint8)
        zv2[info[i]] = 1
        for j in range(mx):  # Z-string on the H_X pivot block
            zv2[piv_x[j]] = Rx[j, info[i]]
        logical_z.append(PauliOp(xv2, zv2, f))

    # verify commutation: logicals commute with checks, pair symplectically
    for i, lx in enumerate(logical_x):
        if lin.matvec(code.hz, lx.x_part, f).any():
            raise CssError("logical X anticommutes with a Z check")
    for i, lz in enumerate(logical_z):
        if lin.matvec(code.hx, lz.z_part, f).any():
            raise CssError("logical Z anticommutes with an X check")
    for i, lx in enumerate(logical_x):
        for j, lz in enumerate(logical_z):
            sym = 0
            for a, b in zip(lx.x_part, lz.z_part):
                sym ^= f.mul(int(a), int(b))
            expect = 1 if i == j else 0
            if (sym != 0) != (expect != 0):
                raise CssError("logical pairing matrix is not the identity pattern")
    out = CanonicalLogicals(perm, logical_x, logical_z, piv_z, piv_x, info)
    code._canonical = out
    return out


# ---------------------------------------------------------------------------
# syndrome extraction circuit
# ---------------------------------------------------------------------------


def _bipartite_edge_coloring(edges, n_left, n_right):
    """Exact Delta-coloring of a simple bipartite graph (Konig).

    The graph is padded to a Delta-regular bipartite multigraph; each of
    the Delta perfect matchings becomes one color class, and a real edge
    takes the color of the first matching that consumes one of its units.
    """
    if not edges:
        return {}, 0
    if len(set(edges)) != len(edges):
        raise CssError("duplicate Tanner edges")
    deg_l = [0] * n_left
    deg_r = [0] * n_right
    for (u, v) in edges:
        deg_l[u] += 1
        deg_r[v] += 1
    delta = max(max(deg_l), max(deg_r))
    size = max(n_left, n_right, 1)
    remaining: dict[tuple, int] = {e: 1 for e in edges}
    need_l = [delta - (deg_l[u] if u < n_left else 0) for u in range(size)]
    need_r = [delta - (deg_r[v] if v < n_right else 0) for v in range(size)]
    ul = [u for u in range(size) for _ in range(need_l[u])]
    vr = [v for v in range(size) for _ in range(need_r[v])]
    if len(ul) != len(vr):
        raise CssError("padding bookkeeping broken")
    for u, v in zip(ul, vr):
        remaining[(u, v)] = remaining.get((u, v), 0) + 1

    coloring = {}
    uncolored = set(edges)
    for color in range(delta):
        G = nx.Graph()
        G.add_nodes_from(("L", u) for u in range(size))
        G.add_nodes_from(("R", v) for v in range(size))
        for (u, v), m in remaining.items():
            if m > 0:
                G.add_edge(("L", u), ("R", v))
        match = nx.bipartite.hopcroft_karp_matching(G, top_nodes=[("L", u) for u in range(size)])
        for u in range(size):
            key = ("L", u)
            if key not in match:
                raise CssError("regular bipartite multigraph missing a perfect matching")
            v = match[key][1]
            remaining[(u, v)] -= 1
            if (u, v) in uncolored:
                coloring[(u, v)] = color
                uncolored.discard((u, v))
    if uncolored:
        raise CssError("edge coloring incomplete")
    return coloring, delta


@dataclass
class SyndromeCircuit:
    circuit: Circuit
    x_ancillas: dict         # hx row -> ancilla qubit (X-check, measures sigma_Z)
    z_ancillas: dict         # hz row -> ancilla qubit (Z-check, measures sigma_X)
    x_meas_refs: dict        # hx row -> record ref
    z_meas_refs: dict
    coloring_x: dict
    coloring_z: dict
    n_data: int
    n_total: int

    def entangling_depth(self) -> int:
        depth = 0
        for layer in self.circuit.layers:
            if any(op.name in ("CNOT", "CZ") for op in layer):
                depth += 1
        return depth


def build_syndrome_circuit(code: CssCode) -> SyndromeCircuit:
    """One-shot syndrome extraction: |+> ancillas, a CNOT (X checks) or CZ
    (Z checks) layer per color class, then H + MZ on the ancillas."""
    if code.field.l != 1:
        raise CssError("syndrome circuits are qubit-only")
    n = code.n
    rx = code.hx.shape[0]
    rz = code.hz.shape[0]
    x_anc = {i: n + i for i in range(rx)}
    z_anc = {i: n + rx + i for i in range(rz)}
    n_total = n + rx + rz

    edges_x = [(i, j) for i in range(rx) for j in range(n) if code.hx[i, j]]
    edges_z = [(i, j) for i in range(rz) for j in range(n) if code.hz[i, j]]
    col_x, dx = _bipartite_edge_coloring(edges_x, rx, n) if edges_x else ({}, 0)
    col_z, dz = _bipartite_edge_coloring(edges_z, rz, n) if edges_z else ({}, 0)

    layers = []
    prep = [Op("PREPPLUS", (x_anc[i],)) for i in range(rx)] + \
           [Op("PREPPLUS", (z_anc[i],)) for i in range(rz)]
    if prep:
        layers.append(prep)
    for c in range(dx):
        layer = [Op("CNOT", (x_anc[i], j)) for (i, j), cc in col_x.items() if cc == c]
        if layer:
            layers.append(layer)
    for c in range(dz):
        layer = [Op("CZ", (z_anc[i], j)) for (i, j), cc in col_z.items() if cc == c]
        if layer:
            layers.append(layer)
    meas = [Op("H", (x_anc[i],)) for i in range(rx)] + [Op("H", (z_anc[i],)) for i in range(rz)]
    if meas:
        layers.append(meas)
    mlayer = [Op("MZ", (x_anc[i],)) for i in range(rx)] + [Op("MZ", (z_anc[i],)) for i in range(rz)]
    x_refs, z_refs = {}, {}
    if mlayer:
        layers.append(mlayer)
        li = len(layers) - 1
        for idx in range(rx):
            x_refs[idx] = f"m{li}.{idx}"
        for idx in range(rz):
            z_refs[idx] = f"m{li}.{rx + idx}"
    circ = Circuit(layers, n=n_total)
    return SyndromeCircuit(circ, x_anc, z_anc, x_refs, z_refs, col_x, col_z, n, n_total)


def measure_syndrome(code: CssCode, tableau: StabilizerTableau, seed: int = 0):
    """Run the syndrome circuit on (a copy widened from) the given data
    tableau; returns (sigma_z, sigma_x, post tableau).

    sigma_z = H_X e_Z outcomes (X checks), sigma_x = H_Z e_X outcomes.
    """
    sc = build_syndrome_circuit(code)
    big = StabilizerTableau(sc.n_total)
    # embed the data state: copy tableau rows into the enlarged tableau
    nd = code.n
    if tableau.n != nd:
        raise CssError("tableau size mismatch")
    big.x[:, :] = 0
    big.z[:, :] = 0
    big.r[:] = 0
    # data destabilizers/stabilizers in first nd qubits, ancillas fresh |0>
    big.x[:nd, :nd] = tableau.x[:nd]
    big.z[:nd, :nd] = tableau.z[:nd]
    big.r[:nd] = tableau.r[:nd]
    big.x[sc.n_total: sc.n_total + nd, :nd] = tableau.x[nd:]
    big.z[sc.n_total: sc.n_total + nd, :nd] = tableau.z[nd:]
    big.r[sc.n_total: sc.n_total + nd] = tableau.r[nd:]
    for a in range(nd, sc.n_total):
        big.x[a, a] = 1
        big.z[sc.n_total + a, a] = 1
    t, rec = run_tableau(sc.circuit, seed=seed, n=sc.n_total, tableau=big)
    sigma_z = np.array([rec.outcomes[sc.x_meas_refs[i]] for i in range(code.hx.shape[0])], dtype=np.uint8)
    sigma_x = np.array([rec.outcomes[sc.z_meas_refs[i]] for i in range(code.hz.shape[0])], dtype=np.uint8)
    return sigma_z, sigma_x, t


@dataclass
class EncodeResult:
    tableau: StabilizerTableau      # includes syndrome ancillas
    n_data: int
    circuit: Circuit                # product prep + one syndrome round
    sigma_z: np.ndarray
    sigma_x: np.ndarray
    correction_x: np.ndarray        # X-part applied
    correction_z: np.ndarray        # Z-part applied


def encode_product_state(code: CssCode, basis_spec, seed: int = 0) -> EncodeResult:
    """Prepare a logical product state: physical product prep, one round of
    check measurement, Gaussian-elimination correction, logical-frame fixup.

    basis_spec = ("z", bits) or ("x", bits) over the k logicals.
    """
    basis, bits = basis_spec
    canon = canonical_logicals(code)
    if len(bits) != code.k:
        raise CssError("basis_spec length != k")
    f = code.field
    if f.l != 1:
        raise CssError("encoding procedure is qubit-only")
    n = code.n

    prep_ops = []
    t = StabilizerTableau(n)
    for pos, q in enumerate(canon.info_block):
        if basis == "z":
            if bits[pos]:
                t.pauli_x(q)
                prep_ops.append(Op("X", (q,)))
        elif basis == "x":
            t.h(q)
            prep_ops.append(Op("H", (q,)))
            if bits[pos]:
                t.pauli_z(q)
                prep_ops.append(Op("Z", (q,)))
        else:
            raise CssError("basis must be 'z' or 'x'")
    for q in canon.mz_block:
        t.h(q)          # |+> block
        prep_ops.append(Op("H", (q,)))
    # mx block stays |0>

    sigma_z, sigma_x, big = measure_syndrome(code, t, seed=seed)
    sc = build_syndrome_circuit(code)
    circuit = Circuit(([prep_ops] if prep_ops else []) + sc.circuit.layers,
                      n=sc.n_total)

    e_z = lin.solve(code.hx, sigma_z, f) if code.hx.shape[0] else np.zeros(n, dtype=np.uint8)
    e_x = lin.solve(code.hz, sigma_x, f) if code.hz.shape[0] else np.zeros(n, dtype=np.uint8)
    if e_z is None or e_x is None:
        raise CssError("inconsistent syndrome (should not happen without faults)")

    # frame fixing: stop corrections from moving the logical frame
    for i in range(code.k):
        lz = canon.logical_z[i]
        if int(lz.z_part @ e_x.astype(np.int64)) % 2:
            e_x = e_x ^ canon.logical_x[i].x_part
            e_z = e_z ^ canon.logical_x[i].z_part
    for i in range(code.k):
        lx = canon.logical_x[i]
        if int(lx.x_part @ e_z.astype(np.int64)) % 2:
            e_z = e_z ^ canon.logical_z[i].z_part
            e_x = e_x ^ canon.logical_z[i].x_part

    corr_x = np.zeros(big.n, dtype=np.uint8)
    corr_z = np.zeros(big.n, dtype=np.uint8)
    corr_x[:n] = e_x
    corr_z[:n] = e_z
    big.apply_pauli(corr_x, corr_z)
    return EncodeResult(big, n, circuit, sigma_z, sigma_x, corr_x[:n], corr_z[:n])


def encoded_state_generators(code: CssCode, basis_spec):
    """Expected stabilizer generators ((xv, zv, sign) over data qubits)."""
    basis, bits = basis_spec
    canon = canonical_logicals(code)
    n = code.n
    gens = []
    for row in code.hx:
        gens.append((row.copy(), np.zeros(n, dtype=np.uint8), 0))
    for row in code.hz:
        gens.append((np.zeros(n, dtype=np.uint8), row.copy(), 0))
    for i in range(code.k):
        if basis == "z":
            l = canon.logical_z[i]
        else:
            l = canon.logical_x[i]
        gens.append((l.x_part.copy(), l.z_part.copy(), int(bits[i])))
    return gens


def tester_threshold(rho: float, r_min: int, n: int, ell: int, s: int, t_corr: int,
                     measured_weight: Optional[int] = None):
    """sigma_reject for the low-depth codespace tester; reject when the
    measured syndrome weight reaches it."""
    sigma_reject = (rho * r_min / n) * (t_corr - s * (ell - 1)) - s * (ell - 1)
    if sigma_reject <= 0:
        raise CssError(
            f"nonpositive rejection threshold {sigma_reject}: parameters inconsistent at this scale")
    if measured_weight is None:
        return sigma_reject
    return sigma_reject, measured_weight >= sigma_reject
