import math
from fractions import Fraction

import numpy as np
import pytest

from halfspace_lpp.model import ModelParams
from halfspace_lpp import schur


@pytest.fixture
def rng():
    return np.random.default_rng(777)


def test_partition_helpers():
    assert schur.interlaces((2, 1), (3, 2))
    assert schur.interlaces((), (5,))
    assert not schur.interlaces((3,), (2,))
    assert not schur.interlaces((2, 2), (3, 1))
    assert schur.alt_sum((4, 1, 1)) == 4
    assert schur.trim((3, 1, 0, 0)) == (3, 1)


def test_schur_weight_examples():
    # all empty partitions: weight 1
    assert schur.schur_weight([(), ()], 0.5, 0.8, N=3) == pytest.approx(1.0)
    # broken interlacing: weight 0
    assert schur.schur_weight([(3,), (1,)], 0.5, 0.8, N=3) == 0.0
    # N=1, M=0, lambda = (1): tau(c) * s_(1)(q) = c q
    w = schur.schur_weight([(1,)], 0.5, 0.8, N=1)
    assert w == pytest.approx(0.8 * 0.5)
    # too many rows for N: weight 0
    assert schur.schur_weight([(1, 1)], 0.5, 0.8, N=1) == 0.0


def test_principal_specialization():
    # s_lambda(q, q) for lambda = (a, b): q^{a+b} (a - b + 1)
    for lam, N in (((3, 1), 2), ((2,), 2), ((5, 5), 2)):
        got = math.exp(schur.principal_spec_log(lam, 0.3, N))
        a, b = lam[0], lam[1] if len(lam) > 1 else 0
        assert got == pytest.approx(0.3 ** (a + b) * (a - b + 1))
    fr = schur.principal_spec_fraction((3, 1), Fraction(3, 10), 2)
    assert fr == Fraction(3, 10) ** 4 * 3


def test_conditional_ratio_exact():
    q, c = Fraction(3, 10), Fraction(3, 5)
    a = [(3, 1), (3, 2)]
    b = [(2, 1), (3, 2)]
    ratio, pred = schur.conditional_ratio_check(a, b, q, c)
    assert ratio == pred
    # unit ratio for identical sequences
    r2, p2 = schur.conditional_ratio_check(a, a, q, c)
    assert r2 == p2 == 1
    # single-part bump: ratio = c * q^{-1}
    a3 = [(3,), (3,)]
    b3 = [(2,), (3,)]
    r3, p3 = schur.conditional_ratio_check(a3, b3, q, c)
    assert r3 == c / q and p3 == c / q


def test_conditional_ratio_random_pairs(rng):
    # random on-support (M=2, N=2) pairs sharing the final partition
    q, c = Fraction(2, 5), Fraction(1, 2)
    lam_top = (4, 2)
    below = schur.interlacing_below(lam_top)
    for _ in range(10):
        mu_a = below[rng.integers(len(below))]
        mu_b = below[rng.integers(len(below))]
        chain_a = [schur.interlacing_below(mu_a)[-1], mu_a, lam_top]
        chain_b = [schur.interlacing_below(mu_b)[-1], mu_b, lam_top]
        ra, pa = schur.conditional_ratio_check(chain_a, chain_b, q, c)
        assert ra == pa


def test_sampler_matches_enumeration_smallq(rng):
    # q = 0.05, c = 0: P(lambda^0 = empty) matches the enumerated mass
    P = ModelParams(0.05, 0.0)
    N, M, B = 2, 1, 40000
    arr = schur.sample_schur_process_batch(N, M, P, rng, B)
    emp = np.mean([schur.trim(arr[b, :, 0]) == () for b in range(B)])
    seqs, weights, tail = schur.enumerate_schur_support(N, M, P.q, P.c, 12)
    Z = math.exp(schur.schur_normalization_log(P.q, P.c, N, M))
    mass = sum(w for s, w in zip(seqs, weights) if s[0] == ()) / Z
    se = math.sqrt(mass * (1 - mass) / B)
    assert abs(emp - mass) < 3 * se + tail / Z


def test_sampler_interlacing_and_even_columns(rng):
    P = ModelParams(0.4, 0.0)
    arr = schur.sample_schur_process_batch(3, 2, P, rng, 3000)
    # interlacing along the chain: lam_i >= mu_i >= lam_{i+1}
    for j in range(2):
        mu, lam = arr[:, :, j], arr[:, :, j + 1]
        assert np.all(mu <= lam)
        assert np.all(lam[:, 1:] <= mu[:, :-1])
    # c = 0: alternating sum of lambda^0 vanishes (even columns)
    alt = arr[:, 0, 0] - arr[:, 1, 0] + arr[:, 2, 0]
    assert np.all(alt == 0)


def test_partition_fn_series_examples():
    v, tail = schur.partition_fn_series(1, (1, 0), ModelParams(0.5, 0.0))
    assert v == pytest.approx(0.5, abs=1e-10)
    v, tail = schur.partition_fn_series(1, (1, 0), ModelParams(0.5, 0.8))
    assert v == pytest.approx(13.0 / 6.0, abs=1e-9)
    assert tail < 1e-9
    # positivity across a few parameter points
    for q, c in ((0.2, 0.0), (0.8, 1.2), (0.5, 1.9)):
        val, _ = schur.partition_fn_series(3, (4, 0), ModelParams(q, c))
        assert val > 0.0


def test_partition_fn_contour_examples():
    z = schur.partition_fn_contour(1, (1, 0), 0.5, 0.8)
    assert abs(z - 13.0 / 6.0) < 1e-9
    assert abs(z.imag) < 1e-10
    # equal exit values, c = 0: interlacing pins B1(0) = 1 and then c = 0
    # pins B2(0) = 1, leaving the single unit-weight configuration
    z2 = schur.partition_fn_contour(1, (1, 1), 0.5, 0.0)
    assert abs(z2 - 1.0) < 1e-9
    v2, _ = schur.partition_fn_series(1, (1, 1), ModelParams(0.5, 0.0))
    assert v2 == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(Exception):
        schur.partition_fn_contour(1, (1, 0), 0.5, 0.8, r1=0.1)


def test_pair_path_count_matches_brute_enumeration():
    # exact integer cardinality of interlacing path pairs for T1 <= 4
    import itertools

    def brute(T1, y, x):
        def paths(x0, y0):
            out = []
            for mids in itertools.product(range(x0, y0 + 1), repeat=T1 - 1):
                vals = (x0,) + mids + (y0,)
                if all(a <= b for a, b in zip(vals, vals[1:])):
                    out.append(vals)
            return out

        cnt = 0
        for p1 in paths(x[0], y[0]):
            for p2 in paths(x[1], y[1]):
                # interlacing p1(r-1) >= p2(r)
                if all(p1[r - 1] >= p2[r] for r in range(1, T1 + 1)):
                    cnt += 1
        return cnt

    cases = [((2, 0), (1, 0)), ((3, 1), (1, 1)), ((2, 2), (0, 0)),
             ((4, 1), (2, 0)), ((3, 0), (0, 0))]
    for T1 in (1, 2, 3, 4):
        for y, x in cases:
            assert schur.pair_path_count(T1, y, x) == brute(T1, y, x)


def test_characteristic_ratio_trivia():
    P = ModelParams(0.5, 0.3)
    r = schur.characteristic_ratio(60, (20, 0), P, 0.0, 0.0)
    assert abs(r - 1.0) < 1e-12
    # c = 0, s = 0: gap degenerate at 0, ratio 1 for all t
    P0 = ModelParams(0.5, 0.0)
    for t in (0.5, 1.5):
        r = schur.characteristic_ratio(40, (10, 0), P0, 0.0, t)
        assert abs(r - 1.0) < 1e-9


def test_characteristic_ratio_converges():
    P = ModelParams(0.5, 0.3)
    p = 1.0
    sigma = math.sqrt(2.0)
    lim = schur.characteristic_ratio_limit(0.3, 1.0, 1.0)
    errs = []
    for Tn in (100, 400, 1600):
        gap = round(2.0 * sigma * math.sqrt(Tn))
        r = schur.characteristic_ratio(Tn, (gap, 0), P, 1.0, 1.0)
        errs.append(abs(r - lim))
    assert errs[0] > errs[1] > errs[2]


def test_origin_law_hand_case():
    P = ModelParams(0.5, 0.8)
    x1, x2, p = schur.origin_law(1, (1, 0), P)
    Z = 13.0 / 6.0
    for a, b, prob in zip(x1, x2, p):
        w = 0.8 ** (a - b) * 0.5 ** ((1 - a) + (0 - b))
        assert prob == pytest.approx(w / Z, abs=1e-10)
    assert p.sum() == pytest.approx(1.0, abs=1e-8)


def test_origin_exact_sampler(rng):
    P = ModelParams(0.5, 0.8)
    X1, X2 = schur.sample_origin_exact(1, (1, 0), P, rng, 50000)
    assert np.all(X1 >= X2)
    assert np.all(X1 <= 1)
    # P(x1 = 1) = (c/(1-qc)) / Z = (0.8/0.6)/(13/6)
    target = (0.8 / 0.6) / (13.0 / 6.0)
    emp = np.mean(X1 == 1)
    assert abs(emp - target) < 4 * math.sqrt(target * (1 - target) / 50000)
