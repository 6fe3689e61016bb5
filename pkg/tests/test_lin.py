import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftqlab.gfq import GF2, get_field
from ftqlab.lin import (
    INF_DISTANCE,
    ClassicalCode,
    Mat,
    inverse,
    kernel,
    ltc_soundness_estimate,
    matmul,
    matvec,
    min_distance_bruteforce,
    rank,
    rref,
    solve,
    star_product,
    star_square_subset,
)

HAMMING_74 = np.array(
    [
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)


def test_kernel_of_identity_is_zero():
    assert kernel(np.eye(4, dtype=np.uint8)).shape == (0, 4)


def test_kernel_hamming_dimension():
    K = kernel(HAMMING_74)
    assert K.shape == (4, 7)
    assert rank(K) == 4
    assert not matmul(HAMMING_74, K.T).any()


def test_solve_roundtrip_gf2():
    rng = np.random.default_rng(1)
    for _ in range(50):
        M = rng.integers(0, 2, size=(5, 8)).astype(np.uint8)
        x = rng.integers(0, 2, size=8).astype(np.uint8)
        b = matvec(M, x)
        x2 = solve(M, b)
        assert x2 is not None
        assert np.array_equal(matvec(M, x2), b)


def test_solve_roundtrip_gf8():
    f = get_field(3)
    rng = np.random.default_rng(2)
    for _ in range(50):
        M = rng.integers(0, 8, size=(4, 6)).astype(np.uint8)
        x = rng.integers(0, 8, size=6).astype(np.uint8)
        b = matvec(M, x, f)
        x2 = solve(M, b, f)
        assert x2 is not None
        assert np.array_equal(matvec(M, x2, f), b)


def test_solve_inconsistent():
    M = np.array([[1, 1], [1, 1]], dtype=np.uint8)
    assert solve(M, np.array([0, 1], dtype=np.uint8)) is None


def test_inverse_gfq():
    f = get_field(4)
    rng = np.random.default_rng(3)
    found = 0
    while found < 10:
        M = rng.integers(0, 16, size=(4, 4)).astype(np.uint8)
        if rank(M, f) < 4:
            continue
        Minv = inverse(M, f)
        assert np.array_equal(matmul(M, Minv, f), np.eye(4, dtype=np.uint8))
        found += 1


def test_rank_identities():
    rng = np.random.default_rng(4)
    for _ in range(20):
        M = rng.integers(0, 2, size=(6, 10)).astype(np.uint8)
        assert rank(M) + kernel(M).shape[0] == 10


def test_hamming_distance_exact():
    code = ClassicalCode(HAMMING_74)
    assert min_distance_bruteforce(code).value == 3


def test_repetition_distance():
    H = np.array([[1, 1, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 1, 1, 0], [0, 0, 0, 1, 1]], dtype=np.uint8)
    code = ClassicalCode(H)
    d = min_distance_bruteforce(code)
    assert d.value == 5 and d.exact


def test_zero_dim_distance_marker():
    code = ClassicalCode(np.eye(3, dtype=np.uint8))
    assert min_distance_bruteforce(code).value == INF_DISTANCE


def test_gen_check_orthogonal_gfq():
    f = get_field(3)
    rng = np.random.default_rng(5)
    H = rng.integers(0, 8, size=(3, 7)).astype(np.uint8)
    code = ClassicalCode(H, f)
    assert not matmul(code.check, code.gen.T, f).any()


def test_star_trivial():
    a = np.array([1, 0, 1, 1], dtype=np.uint8)
    assert not star_product(a, np.zeros(4, dtype=np.uint8)).any()
    assert np.array_equal(star_product(np.ones(4, dtype=np.uint8), a), a)


@settings(max_examples=80, deadline=None)
@given(
    st.integers(2, 5).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(st.integers(0, 7), min_size=n, max_size=n),
            st.lists(st.integers(0, 7), min_size=n, max_size=n),
            st.lists(st.integers(0, 7), min_size=n, max_size=n),
        )
    )
)
def test_star_bilinear_commutative(data):
    n, a, b, c = data
    f = get_field(3)
    a = np.array(a, dtype=np.uint8)
    b = np.array(b, dtype=np.uint8)
    c = np.array(c, dtype=np.uint8)
    assert np.array_equal(star_product(a, b, f), star_product(b, a, f))
    lhs = star_product(a, b ^ c, f)
    rhs = star_product(a, b, f) ^ star_product(a, c, f)
    assert np.array_equal(lhs, rhs)


def test_star_square_subset_examples():
    # repetition code squared stays inside the full space
    rep = ClassicalCode.from_generator(np.ones((1, 4), dtype=np.uint8))
    full = ClassicalCode(np.zeros((0, 4), dtype=np.uint8))
    assert star_square_subset(rep, rep)
    assert star_square_subset(rep, full)


def test_soundness_repetition3():
    # adjacent-parity checks of the length-3 repetition code
    H = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)
    code = ClassicalCode(H)
    rho = ltc_soundness_estimate(code, "exhaustive")
    # weight-1 words: |Hx|=2 or 1, d(x,C)=1 -> min ratio = (1/2)*3 = 1.5
    assert rho == pytest.approx(1.5)


def test_soundness_full_space_marker():
    code = ClassicalCode(np.zeros((0, 4), dtype=np.uint8))
    assert ltc_soundness_estimate(code, "exhaustive") == INF_DISTANCE


def test_soundness_sampled_dominates_exhaustive():
    rng = np.random.default_rng(6)
    G = rng.integers(0, 2, size=(3, 10)).astype(np.uint8)
    while rank(G) < 3:
        G = rng.integers(0, 2, size=(3, 10)).astype(np.uint8)
    code = ClassicalCode.from_generator(G)
    ex = ltc_soundness_estimate(code, "exhaustive")
    sa = ltc_soundness_estimate(code, "sampled", samples=500, seed=0)
    assert sa >= ex


def test_mat_json_roundtrip():
    f = get_field(2)
    m = Mat(np.array([[1, 2], [3, 0]], dtype=np.uint8), f)
    m2 = Mat.from_json(m.to_json())
    assert np.array_equal(m.a, m2.a) and m2.field == f
