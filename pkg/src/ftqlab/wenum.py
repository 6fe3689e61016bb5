"""Bad-set families and their weight enumerators.

Families are stored explicitly as bitmask subsets of a universe of at
most 64 labeled points.  The three operations (disjoint sum, disjoint
product, composition) mirror sum, product, and substitution of the
attached enumerator polynomials; coefficient identities are exact over
Python integers, and evaluation/Monte Carlo use floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class WenumError(Exception):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class BadSetFamily:
    """Family of subsets of a universe [0, size), members as bitmasks.

    Members form a set, so a family containing the empty subset is
    degenerate: nothing avoids it, and images of the empty subset under
    the two inclusion maps of a disjoint sum coincide (the one corner
    where the coefficient identities of the enumerator ring acquire a
    deduplication).
    """

    size: int
    members: frozenset

    def __init__(self, size: int, members):
        if size > 64:
            raise WenumError("universe larger than 64 points")
        ms = frozenset(int(m) for m in members)
        for m in ms:
            if m < 0 or m >> size:
                raise WenumError("member outside universe")
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "members", ms)

    def __len__(self):
        return len(self.members)

    def enumerator(self) -> "Enumerator":
        coeffs: dict[int, int] = {}
        for m in self.members:
            w = _popcount(m)
            coeffs[w] = coeffs.get(w, 0) + 1
        return Enumerator(coeffs)

    def to_json(self):
        return {"size": self.size, "members": sorted(self.members)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["size"], obj["members"])


@dataclass(frozen=True)
class Enumerator:
    """W(x) = sum_w A_w x^w with nonnegative integer counts A_w."""

    coeffs: tuple

    def __init__(self, coeffs):
        if isinstance(coeffs, dict):
            items = tuple(sorted((int(k), int(v)) for k, v in coeffs.items() if v))
        else:
            items = tuple(sorted((int(k), int(v)) for k, v in coeffs if v))
        if any(v < 0 or k < 0 for k, v in items):
            raise WenumError("enumerator coefficients must be nonnegative")
        object.__setattr__(self, "coeffs", items)

    def as_dict(self):
        return dict(self.coeffs)

    def __add__(self, other):
        d = self.as_dict()
        for k, v in other.coeffs:
            d[k] = d.get(k, 0) + v
        return Enumerator(d)

    def __mul__(self, other):
        d: dict[int, int] = {}
        for k1, v1 in self.coeffs:
            for k2, v2 in other.coeffs:
                d[k1 + k2] = d.get(k1 + k2, 0) + v1 * v2
        return Enumerator(d)

    def __eq__(self, other):
        return isinstance(other, Enumerator) and self.coeffs == other.coeffs

    def __call__(self, x):
        if isinstance(x, Enumerator):
            return self.substitute(x)
        return sum(v * x**k for k, v in self.coeffs)

    def substitute(self, inner: "Enumerator") -> "Enumerator":
        """Polynomial substitution W_self(W_inner(x)), exact."""
        out = Enumerator({})
        for k, v in self.coeffs:
            term = Enumerator({0: v})
            for _ in range(k):
                term = term * inner
            out = out + term
        return out

    def degrees(self):
        return [k for k, _ in self.coeffs]

    def to_coeff_list(self):
        if not self.coeffs:
            return []
        top = max(k for k, _ in self.coeffs)
        out = [0] * (top + 1)
        for k, v in self.coeffs:
            out[k] = v
        return out


def is_avoiding(X: int, fam: BadSetFamily) -> bool:
    """True iff no member of the family is contained in X."""
    if X >> fam.size:
        raise WenumError("X outside universe")
    return all((m & X) != m for m in fam.members)


def boxplus(f1: BadSetFamily, f2: BadSetFamily) -> BadSetFamily:
    """Disjoint-union sum: members of either family, embedded side by side."""
    shift = f1.size
    members = set(f1.members) | {m << shift for m in f2.members}
    return BadSetFamily(f1.size + f2.size, members)


def circledast(f1: BadSetFamily, f2: BadSetFamily) -> BadSetFamily:
    """Disjoint-universe product: one member of each, unioned."""
    shift = f1.size
    members = {m1 | (m2 << shift) for m1 in f1.members for m2 in f2.members}
    return BadSetFamily(f1.size + f2.size, members)


def bullet_compose(fam: BadSetFamily, per_index) -> BadSetFamily:
    """Composition: substitute one family per universe point of `fam`.

    per_index: list of BadSetFamily, one per point of fam's universe.
    The result lives on the disjoint union of the per-index universes.
    """
    if len(per_index) != fam.size:
        raise WenumError("need one family per universe point")
    offsets = []
    total = 0
    for s in per_index:
        offsets.append(total)
        total += s.size
    if total > 64:
        raise WenumError("composed universe larger than 64 points")
    members = set()
    for f in fam.members:
        idxs = [i for i in range(fam.size) if (f >> i) & 1]
        if not idxs:
            members.add(0)
            continue
        choices = [{m << offsets[i] for m in per_index[i].members} for i in idxs]
        stack = [0]
        for ch in choices:
            stack = [acc | m for acc in stack for m in ch]
        members.update(stack)
    return BadSetFamily(total, members)


def bullet_compose_uniform(fam: BadSetFamily, inner: BadSetFamily) -> BadSetFamily:
    return bullet_compose(fam, [inner] * fam.size)


def subsets_of_size(n: int, d: int) -> BadSetFamily:
    """The family S^n_d of all size-d subsets of [n]."""
    import itertools

    members = set()
    for comb in itertools.combinations(range(n), d):
        m = 0
        for c in comb:
            m |= 1 << c
        members.add(m)
    return BadSetFamily(n, members)


def mc_avoidance_bound(fam: BadSetFamily, p: float, trials: int, seed: int):
    """Empirical Pr(iid-p sample is not avoiding) next to the union bound W(p).

    Returns (empirical frequency, bound, standard error).
    """
    if not 0 <= p <= 1:
        raise WenumError("p outside [0,1]")
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(trials):
        draw = rng.random(fam.size) < p
        X = 0
        for i in range(fam.size):
            if draw[i]:
                X |= 1 << i
        if not is_avoiding(X, fam):
            bad += 1
    freq = bad / trials
    bound = float(fam.enumerator()(p))
    se = math.sqrt(max(freq * (1 - freq), 1.0 / trials) / trials)
    return freq, bound, se


@dataclass
class RecursionReport:
    value: float
    exponent: int
    beta: float
    cap: float
    cap_holds: bool
    series_converged: bool


def recursion_bound(f, g, L: int, x: float) -> RecursionReport:
    """Iterate W_i(x) = (f(i) W_{i-1}(x))^{g(i)} from W_0(x) = x.

    Also evaluates the closed-form cap (beta x)^{prod g} where
    log beta = sum_i log f(i) / prod_{j<i} g(j); the cap is only claimed
    when the series is numerically convergent (terms must fall off).
    """
    if not 0 <= x < 1:
        raise WenumError("x must lie in [0,1)")
    # forward iteration in log space to dodge under/overflow
    logw = math.log(x) if x > 0 else -math.inf
    exponent = 1
    for i in range(1, L + 1):
        gi = g(i)
        fi = f(i)
        if fi <= 0 or gi <= 0:
            raise WenumError("f and g must be positive")
        logw = gi * (math.log(fi) + logw)
        exponent *= gi
    # beta series: sum log f(i) / hbar(i), hbar(i) = prod_{j<i} g(j)
    s = 0.0
    hbar = 1.0
    tail = None
    converged = False
    for i in range(1, max(L, 1) + 200):
        term = math.log(f(i)) / hbar
        s += term
        hbar *= g(i)
        if i > max(L, 4) and abs(term) < 1e-12:
            converged = True
            break
        tail = abs(term)
    if not converged and tail is not None and tail < 1e-9:
        converged = True
    beta = math.exp(s) if s < 700 else math.inf
    logcap = exponent * (s + (math.log(x) if x > 0 else -math.inf))
    cap_holds = (not converged) or (logw <= logcap + 1e-9)

    def safe_exp(v):
        if v > 700:
            return math.inf
        if v < -700:
            return 0.0
        return math.exp(v)

    return RecursionReport(safe_exp(logw), exponent, beta, safe_exp(logcap), cap_holds, converged)


def wilson_upper(successes: int, trials: int, z: float = 2.576) -> float:
    """Wilson score upper bound (z = 2.576 for 99%)."""
    if trials == 0:
        return 1.0
    phat = successes / trials
    denom = 1 + z * z / trials
    center = phat + z * z / (2 * trials)
    rad = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return min(1.0, (center + rad) / denom)
