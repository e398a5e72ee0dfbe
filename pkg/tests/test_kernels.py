import math

import numpy as np
import pytest

from halfspace_lpp.model import ModelParams, ParameterError, ScalingConstantsBulk, ScalingConstantsEdge
from halfspace_lpp import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(31)


def test_kernel_bm_values():
    assert kernels.kernel_bm(1.0, 0.0, 1.0, 0.0) == pytest.approx(
        1.0 / math.sqrt(2.0 * math.pi)
    )
    # first term equals 1 when s = 1/(2 pi) and x = 0
    s = 1.0 / (2.0 * math.pi)
    assert kernels.kernel_bm(s, 0.0, 1.0, 0.0) == pytest.approx(1.0)
    # s <= t drops the second term
    assert kernels.kernel_bm(1.0, 0.3, 2.0, 5.0) == pytest.approx(
        math.exp(-0.09 / 2.0) / math.sqrt(2.0 * math.pi)
    )
    with pytest.raises(ParameterError):
        kernels.kernel_bm(0.0, 0.0, 1.0, 0.0)


def test_phase_function_identities():
    q, c = 0.5, 1.4
    cst = ScalingConstantsEdge(q, c)
    # S1(1) = 0 for the bulk phase
    assert abs(kernels.s1_bulk(np.array([1.0 + 0j]), q)[0]) < 1e-14
    # analytic second derivatives match the closed forms
    for kap in (0.0, 2.0, 5.0):
        d2 = kernels.s2_edge_d2(c + 0j, kap, q, c)
        assert d2.real == pytest.approx(
            cst.sigma2 ** 2 * (cst.kappa_bar - kap) / c ** 2, rel=1e-10
        )
    g2 = kernels.g2_edge_d2(c + 0j, q, c)
    assert g2.real == pytest.approx(-cst.sigma2 ** 2 / c ** 2, rel=1e-10)
    # S-to-Shat rescaling identity at random points
    zs = np.array([0.8 + 0.3j, 1.2 - 0.5j])
    for kap in (0.5, 3.0):
        kh = 1.0 / (1.0 + kap)
        lhs = kernels.s2_edge(zs, kap, q, c)
        rhs = (1.0 + kap) * kernels.s_hat(zs, kh, q, c, 2)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_phase_diagnostics_single():
    rep = kernels.phase_diagnostics(0.5, 1.4, [0.0, 4.0])
    assert rep["ok"], [c for c in rep["checks"] if not c["ok"]]


def test_kernel_geo_antisymmetry_and_k21(rng):
    P = ModelParams(0.4, 0.7)
    kv = kernels.kernel_geo(1, 2, 2, -1, P, 3, 1, 2)
    kv_sw = kernels.kernel_geo(2, -1, 1, 2, P, 3, 2, 1)
    assert kv.k11 == pytest.approx(-kv_sw.k11, abs=1e-10)
    assert kv.k22 == pytest.approx(-kv_sw.k22, abs=1e-10)
    assert kv.k21 == pytest.approx(-kv_sw.k12, abs=1e-12)


def test_kernel_geo_contour_independence():
    P = ModelParams(0.4, 0.7)
    q, c = 0.4, 0.7
    base = kernels.kernel_geo(1, 1, 1, 1, P, 3, 1, 1)
    r1, rz, rw, r2 = kernels.geo_default_radii(q, c, True)
    for fac in (0.8, 1.2):
        radii = (
            1.0 + (r1 - 1.0) * fac,
            1.0 + (rz - 1.0) * fac,
            max(c, q) + (rw - max(c, q)) * fac,
            max(1.0, c, q) + (r2 - max(1.0, c, q)) * fac,
        )
        kv = kernels.kernel_geo(1, 1, 1, 1, P, 3, 1, 1, radii=radii)
        assert abs(kv.k11 - base.k11) < 1e-8
        assert abs(kv.k12 - base.k12) < 1e-8
        assert abs(kv.k22 - base.k22) < 1e-8


def test_kernel_geo_sum_rule_and_positivity():
    # expected number of points at levels >= -N equals N exactly, and the
    # density is nonnegative up to the reported quadrature error
    P = ModelParams(0.4, 0.7)
    N = 3
    total = 0.0
    for x in range(-N, 40):
        rho, err = kernels.rho1_geo(x, P, N, 1)
        assert rho >= -max(err, 1e-12)
        total += rho
    assert total == pytest.approx(N, abs=1e-6)


def test_kernel_geo_infeasible_parameters():
    # c >= 1/q leaves no admissible contour family (rejected at the domain)
    with pytest.raises((kernels.ContourPlacementError, ParameterError)):
        kernels.kernel_geo(1, 0, 1, 0, (0.5, 2.5), 3, 1, 1)


def test_quadrature_self_consistency():
    # halving tol moves the value by less than the reported error
    P = ModelParams(0.4, 0.7)
    kv1 = kernels.kernel_geo(1, 0, 1, 2, P, 3, 1, 1, tol=1e-7)
    kv2 = kernels.kernel_geo(1, 0, 1, 2, P, 3, 1, 1, tol=5e-8)
    assert abs(kv1.k12 - kv2.k12) <= max(kv1.err, 1e-12)


def test_hs_limit_r_values():
    # indicator structure of R12
    comp = kernels.hs_limit_components(1.0, 0.1, 0.5, 0.2, tol=1e-8)
    assert comp["R12"] == 0.0
    # paper value at (0, 0; 1, 0): -(4 pi)^{-1/2} e^{+1/12}
    comp = kernels.hs_limit_components(1e-12, 0.0, 1.0, 0.0, tol=1e-8)
    target = -math.exp(1.0 / 12.0) / math.sqrt(4.0 * math.pi)
    assert comp["R12"] == pytest.approx(target, rel=1e-9)
    # vanishing prefactor of R22 at y - t^2 - x + s^2 = 0
    c2 = kernels.hs_limit_components(0.5, 0.3, 1.0, 0.3 + 0.75, tol=1e-8)
    assert abs(c2["R22"]) < 1e-12


def test_limit_bulk_r12_indicator():
    sc = ScalingConstantsBulk(0.5)
    comp = kernels.bulk_limit_components(1.5, 0.0, 1.0, 0.3, sc, tol=1e-8)
    assert comp["R12"] == 0.0


def test_r22_closed_form_cross_check(rng):
    sc = ScalingConstantsBulk(0.5)
    for _ in range(3):
        s, t = rng.uniform(0.2, 1.5, 2)
        x, y = rng.uniform(-1.0, 1.0, 2)
        comp = kernels.bulk_limit_components(s, x, t, y, sc, tol=1e-10)
        closed = kernels.r22_limit_closed_form(s, x, t, y, sc.f1)
        assert abs(comp["R22"] - closed) < 1e-8


def test_conjugation_identity(rng):
    sc = ScalingConstantsBulk(0.5)
    s, t = 0.7, 1.1
    x, y = 0.2, -0.4
    a = kernels.kernel_limit_bulk(s, x, t, y, sc, tol=1e-9)
    b = kernels.kernel_limit_bulk_from_hs(s, x, t, y, sc, tol=1e-9)
    assert np.max(np.abs(a.as_matrix() - b.as_matrix())) < 1e-7


def test_k22_antisymmetry_numerical():
    sc = ScalingConstantsBulk(0.5)
    a = kernels.kernel_limit_bulk(0.8, 0.1, 1.2, -0.2, sc, tol=1e-9)
    b = kernels.kernel_limit_bulk(1.2, -0.2, 0.8, 0.1, sc, tol=1e-9)
    assert abs(a.k22 + b.k22) < 1e-7
    assert abs(a.k11 + b.k11) < 1e-7
    assert a.k21 == pytest.approx(-b.k12, abs=1e-12)


def test_edge_prelimit_trivia():
    P = ModelParams(0.5, 1.4)
    # s = t kills the heat-kernel summand of R12: components at s=t are finite
    comp = kernels.edge_prelimit_components(1.0, 0.0, 1.0, 0.0, P, 64, tol=1e-7)
    assert np.isfinite(comp["R12"].real)
    with pytest.raises(ParameterError):
        kernels.edge_prelimit_components(9.0, 0.0, 1.0, 0.0, P, 64)


def test_bulk_feasibility_predicate():
    ok_large, checks = kernels.bulk_prelimit_feasible(0.5, 0.8, 100000)
    assert ok_large, checks
    ok_small, checks = kernels.bulk_prelimit_feasible(0.5, 0.8, 50)
    assert not ok_small  # c = 0.8 not inside gamma^- at N = 50


def test_edge_feasibility_predicate():
    ok, checks = kernels.edge_prelimit_feasible(0.5, 1.4, 100)
    assert ok, checks
    ok2, _ = kernels.edge_prelimit_feasible(0.5, 1.95, 4)
    assert not ok2


def test_expected_count_tail_large_a():
    P = ModelParams(0.5, 1.4)
    v, _ = kernels.expected_count_tail(8.0, P, 100, "edge", 0.5)
    assert abs(v) < 0.01
    Pb = ModelParams(0.5, 0.8)
    v2, _ = kernels.expected_count_tail(6.0, Pb, 60, "bulk", 1.0)
    assert abs(v2) < 0.01
    with pytest.raises(ParameterError):
        kernels.expected_count_tail(0.0, P, 50, "nosuch", 0.5)
