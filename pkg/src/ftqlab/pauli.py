"""Qudit Pauli operators, a qubit stabilizer-tableau simulator, and circuits.

The tableau follows the destabilizer layout of Aaronson-Gottesman: rows
0..n-1 are destabilizers, rows n..2n-1 stabilizers, and a row (x, z, r)
stands for the Hermitian Pauli (-1)^r W(x, z) with W acting per qubit as
i^{x z} X^x Z^z (so W(1,1) = Y).  Qudit Paulis over GF(q) are tracked as
symplectic vectors only; the tableau itself is qubit-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gfq import GF2, FieldTable, trace


class PauliError(Exception):
    pass


# ---------------------------------------------------------------------------
# qudit Pauli operators (symplectic form over GF(q))
# ---------------------------------------------------------------------------


@dataclass
class PauliOp:
    """X^(q)(x_i) Z^(q)(z_i) per site, with a phase exponent (power of i).

    For qubit use the phase matters; for qudit diagonal tracking only the
    GF(2) sign survives and phase is kept mod 4 anyway.
    """

    x_part: np.ndarray
    z_part: np.ndarray
    field: FieldTable = GF2
    phase: int = 0  # exponent of i, mod 4

    def __post_init__(self):
        self.x_part = np.asarray(self.x_part, dtype=np.uint8)
        self.z_part = np.asarray(self.z_part, dtype=np.uint8)
        if self.x_part.shape != self.z_part.shape:
            raise PauliError("x/z length mismatch")
        self.phase %= 4

    @property
    def n(self):
        return len(self.x_part)

    @classmethod
    def identity(cls, n, field: FieldTable = GF2):
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8), field)

    @classmethod
    def single(cls, n, site, kind: str, value: int = 1, field: FieldTable = GF2):
        p = cls.identity(n, field)
        if "X" in kind:
            p.x_part[site] = value
        if "Z" in kind:
            p.z_part[site] = value
        if kind == "Y":
            p.x_part[site] = value
            p.z_part[site] = value
            p.phase = 1
        return p

    def commutation_symbol(self, other: "PauliOp") -> int:
        """tr(<x_P, z_Q> - <x_Q, z_P>) in GF(2); 0 = commute."""
        if self.field != other.field:
            raise PauliError("field mismatch")
        f = self.field
        acc = 0
        for a, b in ((self.x_part, other.z_part), (other.x_part, self.z_part)):
            for ai, bi in zip(a, b):
                acc ^= trace(f.mul(int(ai), int(bi)), f)
        return acc

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        # phase tracking is exact only for qubits; qudit use is frame-level
        if self.field.l == 1:
            ph = self.phase + other.phase
            for xa, za, xb, zb in zip(self.x_part, self.z_part, other.x_part, other.z_part):
                ph += _g_phase(int(xa), int(za), int(xb), int(zb))
            return PauliOp(self.x_part ^ other.x_part, self.z_part ^ other.z_part, self.field, ph % 4)
        return PauliOp(self.x_part ^ other.x_part, self.z_part ^ other.z_part, self.field,
                       (self.phase + other.phase) % 4)

    def weight(self) -> int:
        return int(np.count_nonzero(self.x_part | self.z_part))

    def support(self):
        return [i for i in range(self.n) if self.x_part[i] or self.z_part[i]]


def _g_phase(x1, z1, x2, z2):
    """Exponent of i from W(x1,z1) W(x2,z2) = i^g W(x1+x2, z1+z2) (AG04)."""
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1 and z1 == 0:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


# ---------------------------------------------------------------------------
# circuits
# ---------------------------------------------------------------------------

ONE_QUBIT_GATES = {"H", "S", "X", "Y", "Z"}
TWO_QUBIT_GATES = {"CNOT", "CZ", "SWAP"}
MEASUREMENTS = {"MZ", "MX"}
PREPS = {"PREP0", "PREPPLUS"}


@dataclass(frozen=True)
class Op:
    name: str
    qubits: tuple
    ref: Optional[str] = None  # classical control for CPAULI: "m<layer>.<idx>"
    axis: Optional[str] = None  # CPAULI axis

    def text(self) -> str:
        if self.name == "CPAULI":
            return f"CPAULI {self.axis} {self.qubits[0]} {self.ref}"
        return " ".join([self.name] + [str(q) for q in self.qubits])


class Circuit:
    """Layers of disjoint-support operations."""

    def __init__(self, layers=None, n: Optional[int] = None):
        self.layers: list[list[Op]] = [list(l) for l in (layers or [])]
        self._n = n
        self.validate()

    @property
    def n(self) -> int:
        if self._n is not None:
            return self._n
        top = -1
        for layer in self.layers:
            for op in layer:
                top = max(top, *op.qubits) if op.qubits else top
        return top + 1

    def validate(self):
        for li, layer in enumerate(self.layers):
            seen = set()
            for op in layer:
                for q in op.qubits:
                    if q in seen:
                        raise PauliError(f"layer {li}: overlapping supports")
                    seen.add(q)

    def add_layer(self, ops):
        self.layers.append(list(ops))
        self.validate()

    def gate_names(self):
        return {op.name for layer in self.layers for op in layer}

    def depth(self) -> int:
        return len(self.layers)

    def to_text(self) -> str:
        chunks = []
        for layer in self.layers:
            chunks.append("\n".join(op.text() for op in layer))
        return "\n---\n".join(chunks) + ("\n" if chunks else "")

    @classmethod
    def from_text(cls, text: str, n: Optional[int] = None) -> "Circuit":
        layers = []
        current: list[Op] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line == "---":
                layers.append(current)
                current = []
                continue
            parts = line.split()
            name = parts[0].upper()
            if name == "CPAULI":
                axis, qubit, ref = parts[1], int(parts[2]), parts[3]
                current.append(Op("CPAULI", (qubit,), ref=ref, axis=axis))
            else:
                current.append(Op(name, tuple(int(p) for p in parts[1:])))
        if current:
            layers.append(current)
        return cls(layers, n=n)


# ---------------------------------------------------------------------------
# tableau simulator
# ---------------------------------------------------------------------------


class StabilizerTableau:
    """Destabilizer/stabilizer tableau over n qubits."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1          # destabilizer X_i
            self.z[n + i, i] = 1      # stabilizer Z_i
        # scratch row used by deterministic measurement
        self._sx = np.zeros(n, dtype=np.uint8)
        self._sz = np.zeros(n, dtype=np.uint8)

    @classmethod
    def zero_state(cls, n):
        return cls(n)

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        t._sx = np.zeros(self.n, dtype=np.uint8)
        t._sz = np.zeros(self.n, dtype=np.uint8)
        return t

    # -- gates ---------------------------------------------------------
    def h(self, j):
        self.r ^= self.x[:, j] & self.z[:, j]
        self.x[:, j], self.z[:, j] = self.z[:, j].copy(), self.x[:, j].copy()

    def s(self, j):
        self.r ^= self.x[:, j] & self.z[:, j]
        self.z[:, j] ^= self.x[:, j]

    def cnot(self, c, t):
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cz(self, c, t):
        self.h(t)
        self.cnot(c, t)
        self.h(t)

    def swap(self, a, b):
        self.x[:, [a, b]] = self.x[:, [b, a]]
        self.z[:, [a, b]] = self.z[:, [b, a]]

    def pauli_x(self, j):
        self.r ^= self.z[:, j]

    def pauli_z(self, j):
        self.r ^= self.x[:, j]

    def pauli_y(self, j):
        self.r ^= self.x[:, j] ^ self.z[:, j]

    def apply_pauli(self, xv, zv):
        """Conjugate the state by the Pauli X^xv Z^zv (phases of rows flip
        where they anticommute)."""
        xv = np.asarray(xv, dtype=np.uint8)
        zv = np.asarray(zv, dtype=np.uint8)
        comm = (self.x @ zv.astype(np.int64) + self.z @ xv.astype(np.int64)) % 2
        self.r ^= comm.astype(np.uint8)

    def apply_pauliop(self, p: PauliOp):
        if p.field.l != 1:
            raise PauliError("tableau is qubit-only")
        self.apply_pauli(p.x_part, p.z_part)

    # -- row algebra ----------------------------------------------------
    def _rowsum_into(self, hx, hz, hr4, ix):
        """(hx,hz,phase4) <- (hx,hz) * row ix; returns updated phase exponent."""
        ph = hr4 + 2 * int(self.r[ix])
        rx, rz = self.x[ix], self.z[ix]
        for j in range(self.n):
            ph += _g_phase(int(hx[j]), int(hz[j]), int(rx[j]), int(rz[j]))
        hx ^= rx
        hz ^= rz
        return ph % 4

    def _rowsum(self, target, src):
        ph = 2 * int(self.r[target]) + 2 * int(self.r[src])
        tx, tz = self.x[target], self.z[target]
        sx, sz = self.x[src], self.z[src]
        for j in range(self.n):
            ph += _g_phase(int(sx[j]), int(sz[j]), int(tx[j]), int(tz[j]))
        ph %= 4
        if ph not in (0, 2):
            raise PauliError("non-Hermitian rowsum")
        self.r[target] = ph // 2
        self.x[target] ^= sx
        self.z[target] ^= sz

    # -- measurement -----------------------------------------------------
    def measure_pauli(self, xv, zv, sign: int = 0, rng=None, forced: Optional[int] = None) -> int:
        """Measure the Hermitian Pauli (-1)^sign W(xv, zv); returns the bit."""
        xv = np.asarray(xv, dtype=np.uint8)
        zv = np.asarray(zv, dtype=np.uint8)
        n = self.n
        anti = ((self.x @ zv.astype(np.int64) + self.z @ xv.astype(np.int64)) % 2).astype(np.uint8)
        stab_anti = [i for i in range(n, 2 * n) if anti[i]]
        if stab_anti:
            p = stab_anti[0]
            if forced is not None:
                outcome = forced
            else:
                outcome = int(rng.integers(0, 2)) if rng is not None else 0
            for i in list(range(2 * n)):
                # p - n is overwritten below, so its (anti-Hermitian) product
                # with the pivot is never formed
                if i != p and i != p - n and anti[i]:
                    self._rowsum(i, p)
            # old stabilizer row becomes the destabilizer partner
            self.x[p - n] = self.x[p].copy()
            self.z[p - n] = self.z[p].copy()
            self.r[p - n] = self.r[p]
            self.x[p] = xv.copy()
            self.z[p] = zv.copy()
            self.r[p] = (outcome ^ sign) & 1
            return outcome
        # deterministic: accumulate stabilizer partners of anticommuting destabilizers
        hx = np.zeros(n, dtype=np.uint8)
        hz = np.zeros(n, dtype=np.uint8)
        ph = 0
        for i in range(n):
            if anti[i]:
                ph = self._rowsum_into(hx, hz, ph, n + i)
        if not (np.array_equal(hx, xv) and np.array_equal(hz, zv)):
            raise PauliError("deterministic measurement accumulation failed")
        if ph not in (0, 2):
            raise PauliError("non-real deterministic outcome")
        return ((ph // 2) ^ sign) & 1

    def measure_z(self, j, rng=None, forced=None) -> int:
        zv = np.zeros(self.n, dtype=np.uint8)
        zv[j] = 1
        return self.measure_pauli(np.zeros(self.n, dtype=np.uint8), zv, 0, rng, forced)

    def measure_x(self, j, rng=None, forced=None) -> int:
        xv = np.zeros(self.n, dtype=np.uint8)
        xv[j] = 1
        return self.measure_pauli(xv, np.zeros(self.n, dtype=np.uint8), 0, rng, forced)

    def prep_zero(self, j, rng=None):
        if self.measure_z(j, rng):
            self.pauli_x(j)

    def prep_plus(self, j, rng=None):
        if self.measure_x(j, rng):
            self.pauli_z(j)

    # -- inspection -------------------------------------------------------
    def stab_rows(self):
        """(x, z, r) arrays of the n stabilizer rows."""
        return self.x[self.n:], self.z[self.n:], self.r[self.n:]

    def destab_rows(self):
        return self.x[: self.n], self.z[: self.n], self.r[: self.n]

    def check_symplectic(self) -> bool:
        """Destabilizer i anticommutes with stabilizer i only; stabilizers commute."""
        n = self.n
        sp = (self.x @ self.z.T + self.z @ self.x.T) % 2
        expect = np.zeros((2 * n, 2 * n), dtype=np.int64)
        for i in range(n):
            expect[i, n + i] = 1
            expect[n + i, i] = 1
        return np.array_equal(sp % 2, expect)

    def pauli_expectation(self, xv, zv, sign=0):
        """+1/-1 if the Pauli is (anti-)stabilized, None if indefinite."""
        xv = np.asarray(xv, dtype=np.uint8)
        zv = np.asarray(zv, dtype=np.uint8)
        anti = ((self.x @ zv.astype(np.int64) + self.z @ xv.astype(np.int64)) % 2).astype(np.uint8)
        if anti[self.n:].any():
            return None
        hx = np.zeros(self.n, dtype=np.uint8)
        hz = np.zeros(self.n, dtype=np.uint8)
        ph = 0
        for i in range(self.n):
            if anti[i]:
                ph = self._rowsum_into(hx, hz, ph, self.n + i)
        if not (np.array_equal(hx, xv) and np.array_equal(hz, zv)):
            raise PauliError("operator not in the stabilizer group +/-")
        return +1 if ((ph // 2) ^ sign) == 0 else -1


# ---------------------------------------------------------------------------
# gate-conjugation of a single Pauli (exact phases)
# ---------------------------------------------------------------------------


def conjugate(p: PauliOp, gate: str, sites) -> PauliOp:
    """U P U^dagger for a Clifford gate; CCZ is rejected."""
    if p.field.l != 1:
        raise PauliError("conjugate is qubit-only")
    gate = gate.upper()
    if gate == "CCZ":
        raise PauliError("CCZ is not Clifford; use error-pattern semantics")
    x = p.x_part.copy()
    z = p.z_part.copy()
    # phase bookkeeping: row represents i^ph W(x,z); W-convention gates flip
    # sign exactly like tableau rows
    sign = 0
    if gate == "H":
        (j,) = sites
        sign ^= x[j] & z[j]
        x[j], z[j] = z[j], x[j]
    elif gate == "S":
        (j,) = sites
        sign ^= x[j] & z[j]
        z[j] ^= x[j]
    elif gate == "CNOT":
        c, t = sites
        sign ^= x[c] & z[t] & (x[t] ^ z[c] ^ 1)
        x[t] ^= x[c]
        z[c] ^= z[t]
    elif gate == "CZ":
        c, t = sites
        for g, ss in (("H", (t,)), ("CNOT", (c, t)), ("H", (t,))):
            q = conjugate(PauliOp(x, z, p.field, 0), g, ss)
            x, z = q.x_part, q.z_part
            sign ^= q.phase >> 1
        return PauliOp(x, z, p.field, (p.phase + 2 * sign) % 4)
    elif gate == "SWAP":
        a, b = sites
        x[[a, b]] = x[[b, a]]
        z[[a, b]] = z[[b, a]]
    elif gate in ("X", "Y", "Z"):
        (j,) = sites
        if gate == "X":
            sign ^= z[j]
        elif gate == "Z":
            sign ^= x[j]
        else:
            sign ^= x[j] ^ z[j]
    else:
        raise PauliError(f"unknown gate {gate!r}")
    return PauliOp(x, z, p.field, (p.phase + 2 * int(sign)) % 4)


# ---------------------------------------------------------------------------
# running circuits with fault injection
# ---------------------------------------------------------------------------


@dataclass
class RunRecord:
    outcomes: dict            # ref "m<layer>.<k>" -> bit
    by_layer: list            # list of lists of (op_index, qubit, bit)

    def bit(self, ref: str) -> int:
        return self.outcomes[ref]


def run_tableau(circuit: Circuit, injected=None, seed: int = 0, n: Optional[int] = None,
                tableau: Optional[StabilizerTableau] = None, check_symplectic: bool = False):
    """Simulate a Clifford circuit with optional injected Pauli faults.

    injected maps a layer index to a PauliOp (or (xv, zv) pair) applied
    after that layer executes; key -1 applies before the first layer.
    Returns (tableau, RunRecord).  Deterministic given the seed.
    """
    names = circuit.gate_names()
    if "CCZ" in names:
        raise PauliError("non-Clifford gate present: CCZ")
    nq = n if n is not None else circuit.n
    t = tableau if tableau is not None else StabilizerTableau(nq)
    if t.n < nq:
        raise PauliError("tableau smaller than circuit")
    rng = np.random.default_rng(seed)
    injected = injected or {}

    def apply_fault(key):
        if key in injected:
            f = injected[key]
            if isinstance(f, PauliOp):
                t.apply_pauliop(f)
            else:
                t.apply_pauli(*f)

    record = RunRecord({}, [])
    apply_fault(-1)
    for li, layer in enumerate(circuit.layers):
        meas_idx = 0
        layer_meas = []
        for oi, op in enumerate(layer):
            nm = op.name
            if nm == "H":
                t.h(op.qubits[0])
            elif nm == "S":
                t.s(op.qubits[0])
            elif nm == "X":
                t.pauli_x(op.qubits[0])
            elif nm == "Y":
                t.pauli_y(op.qubits[0])
            elif nm == "Z":
                t.pauli_z(op.qubits[0])
            elif nm == "CNOT":
                t.cnot(*op.qubits)
            elif nm == "CZ":
                t.cz(*op.qubits)
            elif nm == "SWAP":
                t.swap(*op.qubits)
            elif nm == "PREP0":
                t.prep_zero(op.qubits[0], rng)
            elif nm == "PREPPLUS":
                t.prep_plus(op.qubits[0], rng)
            elif nm == "MZ":
                b = t.measure_z(op.qubits[0], rng)
                record.outcomes[f"m{li}.{meas_idx}"] = b
                layer_meas.append((oi, op.qubits[0], b))
                meas_idx += 1
            elif nm == "MX":
                b = t.measure_x(op.qubits[0], rng)
                record.outcomes[f"m{li}.{meas_idx}"] = b
                layer_meas.append((oi, op.qubits[0], b))
                meas_idx += 1
            elif nm == "CPAULI":
                if record.outcomes.get(op.ref, 0):
                    {"X": t.pauli_x, "Y": t.pauli_y, "Z": t.pauli_z}[op.axis](op.qubits[0])
            else:
                raise PauliError(f"unknown op {nm!r}")
        record.by_layer.append(layer_meas)
        apply_fault(li)
        if check_symplectic and not t.check_symplectic():
            raise PauliError(f"symplectic invariant broken after layer {li}")
    return t, record


# ---------------------------------------------------------------------------
# stabilizer-group comparison
# ---------------------------------------------------------------------------


def _group_generators_on_region(t: StabilizerTableau, region) -> list:
    """Signed generators of the subgroup supported inside `region`."""
    from .lin import kernel as gf2_kernel

    n = t.n
    sx, sz, sr = t.stab_rows()
    if region is None:
        region = list(range(n))
    region = sorted(region)
    outside = [q for q in range(n) if q not in set(region)]
    if outside:
        M_out = np.concatenate([sx[:, outside], sz[:, outside]], axis=1)
        combos = gf2_kernel(M_out.T)  # rows c with c @ M_out = 0
    else:
        combos = np.eye(n, dtype=np.uint8)
    gens = []
    for c in combos:
        hx = np.zeros(n, dtype=np.uint8)
        hz = np.zeros(n, dtype=np.uint8)
        ph = 0
        for i in range(n):
            if c[i]:
                ph = t._rowsum_into(hx, hz, ph, n + i)
        if ph not in (0, 2):
            raise PauliError("non-Hermitian group element")
        gens.append((hx, hz, ph // 2))
    return [(hx[region], hz[region], r) for (hx, hz, r) in gens]


def _in_group(target, gens) -> bool:
    from .lin import solve as gf2_solve

    hx, hz, r = target
    if not gens:
        return not hx.any() and not hz.any() and r == 0
    M = np.array([np.concatenate([gx, gz]) for gx, gz, _ in gens], dtype=np.uint8)
    b = np.concatenate([hx, hz])
    c = gf2_solve(M.T, b)
    if c is None:
        return False
    # recompute sign of the product with exact phase bookkeeping
    m = len(hx)
    ax = np.zeros(m, dtype=np.uint8)
    az = np.zeros(m, dtype=np.uint8)
    ph = 0
    for ci, (gx, gz, gr) in zip(c, gens):
        if ci:
            ph += 2 * gr
            for j in range(m):
                ph += _g_phase(int(ax[j]), int(az[j]), int(gx[j]), int(gz[j]))
            ax ^= gx
            az ^= gz
    ph %= 4
    if ph not in (0, 2):
        raise PauliError("non-Hermitian product")
    return ph // 2 == r


def stab_group_equal(t1: StabilizerTableau, t2: StabilizerTableau, region=None) -> bool:
    """True iff the stabilizer groups, restricted to `region`, coincide."""
    g1 = _group_generators_on_region(t1, region)
    g2 = _group_generators_on_region(t2, region)
    if len(g1) != len(g2):
        # compare actual ranks, not generator counts
        pass
    from .lin import rank as gf2_rank

    def group_rank(gens):
        if not gens:
            return 0
        M = np.array([np.concatenate([gx, gz]) for gx, gz, _ in gens], dtype=np.uint8)
        return gf2_rank(M)

    if group_rank(g1) != group_rank(g2):
        return False
    return all(_in_group(g, g1) for g in g2)


def expected_generators_hold(t: StabilizerTableau, gens, region=None) -> bool:
    """Check each (xv, zv, sign) generator lies in t's (restricted) group."""
    have = _group_generators_on_region(t, region)
    idx = sorted(region) if region is not None else list(range(t.n))
    sel = {q: i for i, q in enumerate(idx)}
    out = []
    for xv, zv, sign in gens:
        xr = np.asarray(xv, dtype=np.uint8)[idx]
        zr = np.asarray(zv, dtype=np.uint8)[idx]
        out.append(_in_group((xr, zr, sign), have))
    return all(out)


def tableau_from_generators(gens, n: int, seed: int = 0) -> StabilizerTableau:
    """State stabilized by the given independent commuting signed generators.

    gens: list of (xv, zv, sign).  Fewer than n generators leaves the
    remaining freedom in whatever frame the measurements produce.
    """
    from .lin import solve as gf2_solve

    t = StabilizerTableau(n)
    rng = np.random.default_rng(seed)
    outs = []
    for xv, zv, sign in gens:
        outs.append(t.measure_pauli(np.asarray(xv, np.uint8), np.asarray(zv, np.uint8), 0, rng))
    # one Pauli flips every wrong sign at once
    M = np.array([np.concatenate([np.asarray(xv, np.uint8), np.asarray(zv, np.uint8)])
                  for xv, zv, _ in gens], dtype=np.uint8)
    b = np.array([o ^ s for o, (_, _, s) in zip(outs, gens)], dtype=np.uint8)
    if b.any():
        u = gf2_solve(M, b)
        if u is None:
            raise PauliError("generator signs are inconsistent")
        fz, fx = u[:n], u[n:]
        t.apply_pauli(fx, fz)
    for xv, zv, sign in gens:
        if t.pauli_expectation(np.asarray(xv, np.uint8), np.asarray(zv, np.uint8), sign) != 1:
            raise PauliError("generator enforcement failed")
    return t


# ---------------------------------------------------------------------------
# local-stochastic fault sampling
# ---------------------------------------------------------------------------

_SINGLE_PAULIS = ("X", "Y", "Z")


def sample_local_stochastic(locations, p: float, seed: int, n: Optional[int] = None):
    """IID location faults: include each location w.p. p, uniform nonidentity
    Pauli on its support.  Returns list of (location, PauliOp).

    locations: list of (layer, qubit tuple).
    """
    if not 0 <= p <= 1:
        raise PauliError("p outside [0,1]")
    rng = np.random.default_rng(seed)
    if n is None:
        n = 1 + max((max(q) for _, q in locations if q), default=0)
    out = []
    for loc in locations:
        if rng.random() >= p:
            continue
        _, qubits = loc
        k = len(qubits)
        idx = int(rng.integers(1, 4**k))  # nonidentity on the support
        xv = np.zeros(n, dtype=np.uint8)
        zv = np.zeros(n, dtype=np.uint8)
        v = idx
        for q in qubits:
            c = v % 4
            v //= 4
            if c in (1, 3):
                xv[q] = 1
            if c in (2, 3):
                zv[q] = 1
        out.append((loc, PauliOp(xv, zv)))
    return out
