import numpy as np
import pytest

from ftqlab.gfq import coords, get_field, trace
from ftqlab import lin
from ftqlab.pqrs import (
    PqrsError,
    build_pqrs,
    bw_decode_c1,
    bw_decode_c2,
    ccz_gadget_costs,
    distill_magic_once,
    interpolation_identities,
    logical_ccz_phase,
    magic_multilevel,
    magic_schedule,
    random_c2perp_element,
    standard_instance,
)


@pytest.fixture(scope="module")
def q8():
    return build_pqrs(8, 2, 2, 1)


@pytest.fixture(scope="module")
def q16():
    return standard_instance(16)


@pytest.fixture(scope="module")
def q32():
    return standard_instance(32)


def test_q8_parameters(q8):
    assert (q8.n, q8.css.k) == (7, 1)
    assert q8.d_bound >= 2


def test_theorem_parameters(q16):
    assert (q16.n, q16.css.k, q16.d_bound) == (12, 4, 2)


def test_theorem_parameters_q32(q32):
    assert (q32.n, q32.css.k, q32.d_bound) == (24, 8, 3)


def test_parameter_validation():
    with pytest.raises(PqrsError):
        build_pqrs(8, 3, 2, 1)  # violates q/3 >= k with 2k <= q-m? k=3 > 8/3
    with pytest.raises(PqrsError):
        build_pqrs(8, 2, 2, 0)


def test_compute_c2_matches_dual(q8, q16):
    assert q8.verify_compute_c2()
    assert q16.verify_compute_c2()


def test_c1_star_c1_in_c2(q8, q16, q32):
    for code in (q8, q16, q32):
        assert lin.star_square_subset(code.c1, code.c2)


def test_distance_witnesses(q16, q32):
    for code in (q16, q32):
        w = code.distance_witnesses()
        assert w["c1"][0] == code.q - code.k + 1 - code.s
        assert w["c2"][0] == code.m + 1 - code.s
        assert min(w["c1"][0], w["c2"][0]) == code.d_bound


def test_q8_distance_bruteforce(q8):
    # 64 codewords of C1 enumerable: exact distance matches the witness
    d = lin.min_distance_bruteforce(q8.c1)
    assert d.exact and d.value == q8.q - q8.k + 1 - q8.s


def test_interpolation_identities(q8):
    rep = interpolation_identities(q8, product_trials=100)
    assert rep.triple_identity and rep.systematic and rep.product_identity
    assert rep.checked_triples == q8.k**3


def test_interpolation_identities_q16(q16):
    rep = interpolation_identities(q16, product_trials=30)
    assert rep.triple_identity and rep.systematic and rep.product_identity


def test_logical_ccz_zero_message(q8):
    z = np.zeros(q8.k, dtype=np.uint8)
    m_bit, c_bit = logical_ccz_phase(q8, z, z, z)
    assert m_bit == 0 and c_bit == 0


@pytest.mark.parametrize("codename", ["q8", "q16"])
def test_logical_ccz_random_with_cosets(codename, q8, q16):
    code = {"q8": q8, "q16": q16}[codename]
    rng = np.random.default_rng(7)
    for _ in range(100):
        msgs = [rng.integers(0, code.q, size=code.k).astype(np.uint8) for _ in range(3)]
        shifts = [random_c2perp_element(code, rng) for _ in range(3)]
        m_bit, c_bit = logical_ccz_phase(code, *msgs, shifts=shifts)
        assert m_bit == c_bit


def test_logical_ccz_basis_triples(q16):
    # basis messages supported on B positions: phase = tr(e_i * e_j * e_k)
    t = q16.field
    bpos = q16.b_indices_in_A()
    for bi in bpos[:2]:
        for bj in bpos[:2]:
            m1 = np.zeros(q16.k, dtype=np.uint8)
            m2 = np.zeros(q16.k, dtype=np.uint8)
            m3 = np.zeros(q16.k, dtype=np.uint8)
            m1[bi] = 1
            m2[bj] = 1
            m3[bi] = 1
            m_bit, c_bit = logical_ccz_phase(q16, m1, m2, m3)
            expect = trace(1, t) if (bi == bj) else 0
            assert m_bit == c_bit == expect


def test_bw_zero_errors(q32):
    rng = np.random.default_rng(1)
    msg = rng.integers(0, 32, size=q32.k).astype(np.uint8)
    cw = q32.codeword(msg)
    out = bw_decode_c1(q32, cw)
    assert out is not None and np.array_equal(out, cw)


def test_bw_c1_within_radius(q32):
    rng = np.random.default_rng(2)
    radius = (q32.n - q32.k) // 2
    assert radius == 7
    for trial in range(50):
        msg = rng.integers(0, 32, size=q32.k).astype(np.uint8)
        cw = q32.codeword(msg)
        r = cw.copy()
        pos = rng.choice(q32.n, size=6, replace=False)
        for p in pos:
            r[p] ^= int(rng.integers(1, 32))
        out = bw_decode_c1(q32, r)
        assert out is not None and np.array_equal(out, cw), trial


def test_bw_c2_within_radius(q32):
    rng = np.random.default_rng(3)
    radius = (q32.n - (q32.q - q32.m)) // 2
    assert radius == 1  # d(C2) = 3 at q = 32
    gen = q32.c2.gen
    for trial in range(50):
        coeff = rng.integers(0, 32, size=gen.shape[0]).astype(np.uint8)
        cw = lin.matvec(gen.T, coeff, q32.field)
        r = cw.copy()
        p = int(rng.integers(q32.n))
        r[p] ^= int(rng.integers(1, 32))
        out = bw_decode_c2(q32, r)
        assert out is not None and np.array_equal(out, cw), trial


def test_ccz_gadget_l1():
    g = ccz_gadget_costs(1)
    assert g.triples == [(0, 0, 0)]


def test_ccz_gadget_l3():
    g = ccz_gadget_costs(3)
    t = get_field(3)
    assert 0 < len(g.triples) <= 27
    for (i, j, k) in g.triples:
        v = t.mul(t.mul(g.self_dual.elements[i], g.self_dual.elements[j]), g.self_dual.elements[k])
        assert trace(v, t) == 1
    # basis change schedule really maps coordinates
    l = 3
    sd, pb = g.self_dual, g.poly
    for x in range(t.q):
        src = list(coords(x, sd)) + [0] * l
        for (r1, a, r2, b) in g.basis_change_cnots[0]:
            ctrl = a if r1 == "src" else l + a
            tgt = b if r2 == "src" else l + b
            src[tgt] ^= src[ctrl]
        for (r1, a, r2, b) in g.basis_change_cnots[1]:
            ctrl = a if r1 == "src" else l + a
            tgt = b if r2 == "src" else l + b
            src[tgt] ^= src[ctrl]
        assert src[:l] == [0] * l
        assert src[l:] == list(coords(x, pb))


def test_ccz_fixup_quadratic(q8):
    g = ccz_gadget_costs(3)
    rng = np.random.default_rng(4)
    for _ in range(20):
        xm = {i: int(rng.integers(2)) for i in range(1, 3)}
        ym = {i: int(rng.integers(2)) for i in range(1, 3)}
        zm = {i: int(rng.integers(2)) for i in range(3) if i != g.trace_one_index}
        coeffs = g.fixup_coefficients(xm, ym, zm)
        # quadratic only: no monomial has all three unknowns
        assert ("x1", "y1", "zj") not in coeffs
        assert set(coeffs) == {(), ("x1",), ("y1",), ("zj",),
                               ("x1", "y1"), ("x1", "zj"), ("y1", "zj")}


def test_fixup_reproduces_trace(q8):
    # brute-force: for all (x, y, z), tr(xyz) = x1*y1*zj + p(x1, y1, zj)
    g = ccz_gadget_costs(3)
    t = get_field(3)
    pb = g.poly
    j = g.trace_one_index
    for x in range(8):
        for y in range(8):
            for z in range(8):
                cx = list(coords(x, pb))
                cy = list(coords(y, pb))
                cz = list(coords(z, pb))
                xm = {i: cx[i] for i in range(1, 3)}
                ym = {i: cy[i] for i in range(1, 3)}
                zm = {i: cz[i] for i in range(3) if i != j}
                coeffs = g.fixup_coefficients(xm, ym, zm)
                val = coeffs[()]
                val ^= coeffs[("x1",)] & cx[0]
                val ^= coeffs[("y1",)] & cy[0]
                val ^= coeffs[("zj",)] & cz[j]
                val ^= coeffs[("x1", "y1")] & cx[0] & cy[0]
                val ^= coeffs[("x1", "zj")] & cx[0] & cz[j]
                val ^= coeffs[("y1", "zj")] & cy[0] & cz[j]
                val ^= cx[0] & cy[0] & cz[j]
                assert val == trace(t.mul(t.mul(x, y), z), t)


def test_magic_round_no_faults(q32):
    res = distill_magic_once(q32, {})
    assert res.success


def test_magic_round_exhaustive_single_position(q32):
    rng = np.random.default_rng(5)
    for pos in range(q32.n):
        vals = tuple(int(v) for v in rng.integers(1, 32, size=6))
        res = distill_magic_once(q32, {pos: vals})
        assert res.success, pos


def test_magic_round_beyond_radius_fails_somewhere(q32):
    # two faulty positions exceed t = 1 at q = 32; some pattern must fail
    rng = np.random.default_rng(6)
    failures = 0
    for trial in range(40):
        pos = rng.choice(q32.n, size=2, replace=False)
        faulty = {int(p): tuple(int(v) for v in rng.integers(1, 32, size=6)) for p in pos}
        if not distill_magic_once(q32, faulty).success:
            failures += 1
    assert failures > 0


def test_magic_schedule_level1():
    specs, M, K = magic_schedule(1)
    s = specs[0]
    assert (s.q, s.n, s.k, s.d, s.t) == (64, 48, 16, 6, 2)
    assert int(M) == 48 * 6**3 and int(K) == 16


def test_magic_multilevel_zero_noise():
    res = magic_multilevel(1, 0.0, trials=5, seed=0)
    assert res.failures == 0
    assert res.yield_fraction == res.yield_fraction  # exact Fraction present


def test_magic_multilevel_small_noise():
    res = magic_multilevel(1, 1e-5, trials=50, seed=1)
    # eps at 1e-5 gives about 0.1 faulty inputs per round; failures need > t
    # faulty positions, so the frequency stays small
    assert res.failure_frequency < 0.2
