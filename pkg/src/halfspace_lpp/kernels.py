"""Correlation kernels of the half-space model: exact finite-size kernel,
prelimit bulk/edge kernels, and their limits, all via contour quadrature.

Every kernel returns a KernelValue2x2 whose off-diagonal blocks satisfy
K21(s,x;t,y) = -K12(t,y;s,x) by construction.  Exponentials are assembled as
a single exp(total exponent) per node so that the individually huge factors
(e^{N S}, lattice powers) never overflow.  All logarithms are principal
branch; on lattice points the total log-coefficients are integers, which
keeps the assembled integrands single-valued across the cut.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, ParameterError, ScalingConstantsBulk, ScalingConstantsEdge
from .contours import (
    Arc,
    Contour,
    ContourPlacementError,
    Segment,
    full_circle,
    integrate_double,
    integrate_single,
    truncate_wedge,
    wedge_pieces,
)

DEFAULT_TOL = 1e-9
EDGE_THETA = 5.0 * math.pi / 16.0  # default wedge angle, inside (pi/4, pi/2)


@dataclass
class KernelValue2x2:
    k11: complex
    k12: complex
    k21: complex
    k22: complex
    err: float

    def as_matrix(self):
        return np.array([[self.k11, self.k12], [self.k21, self.k22]])


# ---------------------------------------------------------------------------
# phase functions (principal logarithm throughout)
# ---------------------------------------------------------------------------

def s1_bulk(z, q):
    z = np.asarray(z, dtype=complex)
    h1 = 2.0 * q / (1.0 - q)
    return np.log(1.0 - q / z) - np.log(1.0 - q * z) - h1 * np.log(z)


def g1_bulk(z, q):
    z = np.asarray(z, dtype=complex)
    p1 = q / (1.0 - q)
    return np.log(1.0 - q / z) - p1 * np.log(z) - math.log(1.0 - q)


def s1_edge(z, kappa, q):
    z = np.asarray(z, dtype=complex)
    h1k = (2.0 * q * math.sqrt(1.0 + kappa) + 2.0 * q * q + q * q * kappa) / (1.0 - q * q)
    return (1.0 + kappa) * np.log(1.0 - q / z) - np.log(1.0 - q * z) - h1k * np.log(z)


def s2_edge(z, kappa, q, c):
    z = np.asarray(z, dtype=complex)
    cst = ScalingConstantsEdge(q, c)
    h2k = cst.h2_kappa(kappa)
    return (1.0 + kappa) * np.log(1.0 - q / z) - np.log(1.0 - q * z) - h2k * np.log(z)


def s2_edge_centered(z, kappa, q, c):
    """S2(z; kappa) - S2(c; kappa), the exponent that drives the edge decay."""
    return s2_edge(z, kappa, q, c) - s2_edge(complex(c), kappa, q, c)


def g2_edge(z, q, c):
    z = np.asarray(z, dtype=complex)
    p2 = q / (c - q)
    return np.log(1.0 - q / z) - p2 * np.log(z)


def g2_edge_centered(z, q, c):
    return g2_edge(z, q, c) - g2_edge(complex(c), q, c)


def s_hat(z, kappa_hat, q, c, which):
    """Auxiliary phases; S_i(z; kappa) = (1+kappa) s_hat(z; 1/(1+kappa))."""
    z = np.asarray(z, dtype=complex)
    if which == 1:
        coef = q * (q + 2.0 * math.sqrt(kappa_hat) + q * kappa_hat) / (1.0 - q * q)
    else:
        coef = (q * c * kappa_hat * (c - q) + q * (1.0 - q * c)) / ((1.0 - q * c) * (c - q))
    return np.log(1.0 - q / z) - kappa_hat * np.log(1.0 - q * z) - coef * np.log(z)


def s2_edge_d1(z, kappa, q, c):
    """Analytic S2'(z; kappa)."""
    cst = ScalingConstantsEdge(q, c)
    h2k = cst.h2_kappa(kappa)
    return (1.0 + kappa) * (q / (z * z)) / (1.0 - q / z) + q / (1.0 - q * z) - h2k / z


def s2_edge_d2(z, kappa, q, c):
    cst = ScalingConstantsEdge(q, c)
    h2k = cst.h2_kappa(kappa)
    # d/dz of (1+kappa) q / (z^2 - q z) is -(1+kappa) q (2z - q) / (z^2 - qz)^2
    t1 = (1.0 + kappa) * (-q * (2.0 * z - q)) / ((z * z - q * z) ** 2)
    t2 = q * q / (1.0 - q * z) ** 2
    return t1 + t2 + h2k / (z * z)


def g2_edge_d1(z, q, c):
    p2 = q / (c - q)
    return (q / (z * z)) / (1.0 - q / z) - p2 / z


def g2_edge_d2(z, q, c):
    p2 = q / (c - q)
    return (-q * (2.0 * z - q)) / ((z * z - q * z) ** 2) + p2 / (z * z)


# ---------------------------------------------------------------------------
# exact kernel of the finite point process
# ---------------------------------------------------------------------------

def geo_default_radii(q, c, u_ge_v):
    """Admissible circle radii for the exact kernel blocks."""
    qinv = 1.0 / q
    r1 = 0.5 * (max(1.0, c) + qinv) if c > 1.0 else 0.5 * (1.0 + qinv)
    if not (1.0 < r1 < qinv):
        raise ContourPlacementError(f"no admissible r1 in (1, 1/q) for c={c}")
    rz = r1
    if u_ge_v:
        lo = max(c, q)
        if lo >= rz:
            raise ContourPlacementError("need max(c,q) < r12^z for nested contours")
        rw = 0.5 * (lo + rz)
    else:
        rw = rz + max(0.5, 0.25 * rz)
    r2 = max(c, q, 1.0) + 0.5
    return r1, rz, rw, r2


def kernel_geo(u, x, v, y, params, N, M_u, M_v, tol=DEFAULT_TOL, radii=None):
    """Exact 2x2 correlation kernel block at points (u, x), (v, y).

    u, v index the slices (with time offsets M_u, M_v); x, y are integer
    levels of the point process {lambda_i - i}.  Integer powers only, so no
    branch issues.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    if radii is None:
        r1, rz, rw, r2 = geo_default_radii(q, c, u >= v)
    else:
        r1, rz, rw, r2 = radii

    def f11(z, w):
        pre = (z - w) / ((z * z - 1.0) * (w * w - 1.0) * (z * w - 1.0))
        pre = pre * (1.0 - c / z) * (1.0 - c / w)
        return (
            pre
            * z ** (-x) * w ** (-y)
            * (1.0 - q / z) ** (M_u + N) * (1.0 - q / w) ** (M_v + N)
            * (1.0 - q * z) ** (-N) * (1.0 - q * w) ** (-N)
        )

    def f12(z, w):
        pre = (z * w - 1.0) / (z * (z - w) * (z * z - 1.0)) * (z - c) / (w - c)
        return (
            pre
            * z ** (-x) * w ** y
            * (1.0 - q / z) ** (M_u + N) * (1.0 - q / w) ** (-M_v - N)
            * (1.0 - q * z) ** (-N) * (1.0 - q * w) ** N
        )

    def f21(z, w):
        # f12 with roles (v,y) and (u,x) swapped
        pre = (z * w - 1.0) / (z * (z - w) * (z * z - 1.0)) * (z - c) / (w - c)
        return (
            pre
            * z ** (-y) * w ** x
            * (1.0 - q / z) ** (M_v + N) * (1.0 - q / w) ** (-M_u - N)
            * (1.0 - q * z) ** (-N) * (1.0 - q * w) ** N
        )

    def f22(z, w):
        pre = (z - w) / (z * w - 1.0) / ((z - c) * (w - c))
        return (
            pre
            * z ** x * w ** y
            * (1.0 - q / z) ** (-M_u - N) * (1.0 - q / w) ** (-M_v - N)
            * (1.0 - q * z) ** N * (1.0 - q * w) ** N
        )

    c1 = Contour([full_circle(0.0, r1)])
    c1b = Contour([full_circle(0.0, r1 * 1.0000003)])  # avoid the z=w diagonal exactly
    k11, e11 = integrate_double(f11, c1, c1b, tol)
    cz = Contour([full_circle(0.0, rz)])
    cw = Contour([full_circle(0.0, rw)])
    k12, e12 = integrate_double(f12, cz, cw, tol)
    # swapped slice order flips the nesting requirement
    if radii is None:
        r1s, rzs, rws, _ = geo_default_radii(q, c, v >= u)
    else:
        rzs, rws = rz, rw
    k21m, e21 = integrate_double(
        f21, Contour([full_circle(0.0, rzs)]), Contour([full_circle(0.0, rws)]), tol
    )
    c2 = Contour([full_circle(0.0, r2)])
    c2b = Contour([full_circle(0.0, r2 * 1.0000003)])
    k22, e22 = integrate_double(f22, c2, c2b, tol)
    return KernelValue2x2(
        k11=k11, k12=k12, k21=-k21m, k22=k22, err=max(e11, e12, e21, e22)
    )


def rho1_geo(x, params, N, M_slice, tol=DEFAULT_TOL):
    """One-point function rho_1(x) = K12(x, x) on a single slice."""
    kv = kernel_geo(1, x, 1, x, params, N, M_slice, M_slice, tol)
    return kv.k12.real, kv.err


def rho_k_geo(points, params, N, tol=DEFAULT_TOL):
    """k-point correlation via the Pfaffian of the assembled block matrix.

    points: list of (slice_index, M_slice, x).
    """
    from .pfaffian import pfaffian

    n = len(points)
    A = np.zeros((2 * n, 2 * n), dtype=complex)
    err = 0.0
    for i, (ui, Mi, xi) in enumerate(points):
        for j, (vj, Mj, xj) in enumerate(points):
            if j < i:
                continue
            kv = kernel_geo(ui, xi, vj, xj, params, N, Mi, Mj, tol)
            blk = kv.as_matrix()
            A[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = blk
            if j > i:
                A[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] = -blk.T
            err = max(err, kv.err)
    A = 0.5 * (A - A.T)
    return pfaffian(A).real, err


# ---------------------------------------------------------------------------
# prelimit bulk kernel
# ---------------------------------------------------------------------------

def bulk_contour(a, N, sign):
    """gamma^+/-_N(a): wedge of angle pi/3 (resp. 2pi/3) at 1 + a N^{-1/3},
    legs of euclidean length N^{-1/12}, closed by an origin-centered arc."""
    apex = 1.0 + a * N ** (-1.0 / 3.0)
    phi = math.pi / 3.0 if sign > 0 else 2.0 * math.pi / 3.0
    L = N ** (-1.0 / 12.0)
    grade = max(N ** (-0.25), 1e-3)
    legs = wedge_pieces(apex, phi, L, grade_scale=grade)
    hi = apex + L * cmath.exp(1j * phi)
    rad = abs(hi)
    th = cmath.phase(hi)
    arc = Arc(0.0, rad, th, 2.0 * math.pi - th)
    return Contour([legs[0], legs[1], arc])


def bulk_prelimit_feasible(q, c, N):
    """Contour-nesting conditions under which the prelimit formulas are the
    genuine correlation kernel (they hold for all large N)."""
    inv3 = N ** (-1.0 / 3.0)
    hi = abs(1.0 + inv3 + N ** (-1.0 / 12.0) * cmath.exp(1j * math.pi / 3.0))
    lo_apex = 1.0 - inv3
    lo_rad = abs(1.0 - inv3 + N ** (-1.0 / 12.0) * cmath.exp(2j * math.pi / 3.0))
    checks = {
        "gamma_plus_outside_unit": 1.0 + inv3 > 1.0,
        "gamma_minus_inside_unit": lo_rad < 1.0 and lo_apex < 1.0,
        "qinv_outside_gamma_plus": hi < 1.0 / q,
    }
    if c < 1.0:
        checks["c_inside_gamma_minus"] = c < lo_apex and (c > -lo_rad)
        checks["q_inside_gamma_minus"] = q < lo_apex
    elif c > 1.0:
        checks["c_outside_gamma_plus"] = c > hi
        checks["cinv_inside_gamma_minus"] = 1.0 / c < lo_apex
    return all(checks.values()), checks


def bulk_prelimit_components(s, x, t, y, params, N, tol=DEFAULT_TOL):
    """The five raw pieces I11, I12, I22, R12, R22 of the prelimit bulk kernel."""
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    sc = ScalingConstantsBulk(q)
    s1g, n13 = sc.sigma1, N ** (1.0 / 3.0)
    Ts, Tt = math.floor(s * N ** (2.0 / 3.0)), math.floor(t * N ** (2.0 / 3.0))
    gp = bulk_contour(1.0, N, +1)
    gm = bulk_contour(-1.0, N, -1)

    def expo_plus(z, T, a):
        return N * s1_bulk(z, q) + T * g1_bulk(z, q) - s1g * a * n13 * np.log(z)

    def f11(z, w):
        pre = (
            4.0 * s1g * s1g * N ** (2.0 / 3.0)
            * (z - w) / ((z * z - 1.0) * (w * w - 1.0) * (z * w - 1.0))
            * (1.0 - c / z) * (1.0 - c / w)
        )
        return pre * np.exp(expo_plus(z, Ts, x) + expo_plus(w, Tt, y))

    def f12(z, w):
        pre = (
            s1g * n13 * (z * w - 1.0) / (z * (z - w) * (z * z - 1.0)) * (z - c) / (w - c)
        )
        return pre * np.exp(expo_plus(z, Ts, x) - expo_plus(w, Tt, y))

    def f22(z, w):
        pre = 0.25 * (z - w) / (z * w - 1.0) / ((z - c) * (w - c))
        return pre * np.exp(-expo_plus(z, Ts, x) - expo_plus(w, Tt, y))

    i11, e1 = integrate_double(f11, gp, bulk_contour(1.0 + 1e-7, N, +1), tol)
    i12, e2 = integrate_double(f12, gp, gm, tol)
    i22, e3 = integrate_double(f22, gm, bulk_contour(-1.0 - 1e-7, N, -1), tol)

    # R12: heat-kernel part (s < t) plus the supercritical residue term
    r12 = 0.0 + 0.0j
    e4 = 0.0
    if s < t:

        def f_r12a(z):
            return -s1g * n13 * np.exp(
                (Ts - Tt) * g1_bulk(z, q)
                + (s1g * y * n13 - s1g * x * n13 - 1.0) * np.log(z)
            )

        v, e = integrate_single(f_r12a, gp, tol)
        r12 += v
        e4 = max(e4, e)
    if c > 1.0:

        def f_r12b(z):
            return (
                s1g * n13 * (z * c - 1.0) / (z * (z * z - 1.0))
                * np.exp(expo_plus(z, Ts, x) - expo_plus(np.asarray(c, dtype=complex), Tt, y))
            )

        v, e = integrate_single(f_r12b, gp, tol)
        r12 += v
        e4 = max(e4, e)

    # R22: two supercritical residue pieces plus the reflection integral
    r22 = 0.0 + 0.0j
    e5 = 0.0
    if c > 1.0:
        cc = np.asarray(c, dtype=complex)

        def f_r22a(z):
            return np.exp(-expo_plus(z, Ts, x) - expo_plus(cc, Tt, y)) / (
                4.0 * (c * z - 1.0)
            )

        def f_r22b(w):
            return np.exp(-expo_plus(cc, Ts, x) - expo_plus(w, Tt, y)) / (
                4.0 * (c * w - 1.0)
            )

        va, ea = integrate_single(f_r22a, gm, tol)
        vb, eb = integrate_single(f_r22b, gm, tol)
        r22 += va - vb
        e5 = max(ea, eb)

    def f_r22c(w):
        return (1.0 - w * w) / (4.0 * (1.0 - c * w) * (w - c)) * np.exp(
            (s1g * y * n13 - s1g * x * n13 - 1.0) * np.log(w)
            - Ts * g1_bulk(1.0 / w, q)
            - Tt * g1_bulk(w, q)
        )

    vc, ec = integrate_single(f_r22c, gm, tol)
    r22 += vc
    e5 = max(e5, ec)

    err = max(e1, e2, e3, e4, e5)
    return {"I11": i11, "I12": i12, "I22": i22, "R12": r12, "R22": r22, "err": err}


def kernel_N_bulk(s, x, t, y, params, N, tol=DEFAULT_TOL):
    """Assembled prelimit bulk kernel K^N (2x2 block)."""
    fwd = bulk_prelimit_components(s, x, t, y, params, N, tol)
    bwd = bulk_prelimit_components(t, y, s, x, params, N, tol)
    k12 = fwd["I12"] + fwd["R12"]
    k21 = -(bwd["I12"] + bwd["R12"])
    return KernelValue2x2(
        k11=fwd["I11"], k12=k12, k21=k21, k22=fwd["I22"] + fwd["R22"],
        err=max(fwd["err"], bwd["err"]),
    )


def bulk_lattice_point(a, params, N, t):
    """Nearest point of the slice-t lattice Lambda_t(N) to the scaled value a,
    returned with its integer index (level m = lambda_i - i)."""
    sc = ScalingConstantsBulk(params.q)
    Tt = math.floor(t * N ** (2.0 / 3.0))
    m = round(a * sc.sigma1 * N ** (1.0 / 3.0) + sc.h1 * N + sc.p1 * Tt)
    xval = (m - sc.h1 * N - sc.p1 * Tt) / (sc.sigma1 * N ** (1.0 / 3.0))
    return xval, m


# ---------------------------------------------------------------------------
# prelimit edge kernel
# ---------------------------------------------------------------------------

def edge_gamma_contour(c, theta, R, r, grade_scale=None):
    """The wedge-plus-arc contour C(x, theta, R, r) around center x = c."""
    zp = c + r * cmath.exp(1j * theta)
    zm = c + r * cmath.exp(-1j * theta)
    tplus = -c * math.cos(theta) + math.sqrt(R * R - c * c * math.sin(theta) ** 2)
    zetap = c + tplus * cmath.exp(1j * theta)
    zetam = c + tplus * cmath.exp(-1j * theta)
    gs = grade_scale if grade_scale is not None else 0.05
    pieces = []
    pieces.append(Segment(zetam, zm, grade="end", grade_scale=gs))
    if r > 0.0:
        pieces.append(Segment(zm, zp))
    pieces.append(Segment(zp, zetap, grade="start", grade_scale=gs))
    th = cmath.phase(zetap)
    pieces.append(Arc(0.0, abs(zetap), th, 2.0 * math.pi - th))
    return Contour(pieces)


def edge_prelimit_feasible(q, c, N, theta=EDGE_THETA):
    checks = {
        "theta_range": math.pi / 4 < theta < math.pi / 2,
        "wedge_radius_fits": 1.0 / q - c >= (1.0 / math.cos(theta)) * N ** -0.5,
        "circle_between": c + N ** -0.5 > 1.0,
    }
    return all(checks.values()), checks


def edge_prelimit_components(
    s, x, t, y, params, N, theta=EDGE_THETA, R=None, tol=DEFAULT_TOL
):
    """Raw pieces I11, I12, I22, R12, R22 of the prelimit edge kernel.

    Valid for c in (1, 1/q) with s, t in [0, kappa_bar).
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    cst = ScalingConstantsEdge(q, c)
    if not (0.0 <= s < cst.kappa_bar and 0.0 <= t < cst.kappa_bar):
        raise ParameterError(f"s,t must lie in [0, kappa_bar={cst.kappa_bar:.4g})")
    if R is None:
        R = 2.0 / q
    s2g = cst.sigma2
    rn = math.sqrt(N)
    fs = math.floor(s * N) - s * N
    ft = math.floor(t * N) - t * N
    lq_c = cmath.log(1.0 - q / c)

    gam_s = edge_gamma_contour(c, theta, R, N ** -0.5 / math.cos(theta),
                               grade_scale=min(0.2, N ** -0.5))
    gam_t = edge_gamma_contour(c, theta, R, N ** -0.5 / math.cos(theta) * 1.0000003,
                               grade_scale=min(0.2, N ** -0.5))
    circ_s = Contour([full_circle(0.0, cst.z_crit(s) + N ** -0.5)])
    circ_t = Contour([full_circle(0.0, cst.z_crit(t) + N ** -0.5 * 1.0000003)])

    def expo(z, kap, a, frac):
        # N*S2bar + frac*log(1-q/z) - frac*log(1-q/c) - sigma2 a sqrt(N) log(z/c)
        return (
            N * s2_edge_centered(z, kap, q, c)
            + frac * (np.log(1.0 - q / z) - lq_c)
            - s2g * a * rn * (np.log(z) - math.log(c))
        )

    def f11(z, w):
        pre = (
            s2g * rn * (z - w) * (1.0 - c / z) * (1.0 - c / w)
            / ((z * z - 1.0) * (w * w - 1.0) * (z * w - 1.0))
        )
        return pre * np.exp(expo(z, s, x, fs) + expo(w, t, y, ft))

    def f12(z, w):
        pre = (
            s2g * rn * (z * w - 1.0) * (z - c)
            / (z * (z - w) * (z * z - 1.0) * (w - c))
        )
        return pre * np.exp(expo(z, s, x, fs) - expo(w, t, y, ft))

    def f22(z, w):
        pre = s2g * rn * (z - w) / ((z * w - 1.0) * (z - c) * (w - c))
        return pre * np.exp(-expo(z, s, x, fs) - expo(w, t, y, ft))

    i11, e1 = integrate_double(f11, gam_s, gam_t, tol)
    i12, e2 = integrate_double(f12, gam_s, circ_t, tol)
    i22, e3 = integrate_double(f22, circ_s, circ_t, tol)

    r12 = 0.0 + 0.0j
    e4 = 0.0
    if s < t:
        Rt = math.sqrt(c * c + N ** (-1.0 / 6.0))
        ytop = math.sqrt(Rt * Rt - c * c)
        gs = min(0.25, N ** -0.5 / ytop)
        thc = cmath.phase(c + 1j * ytop)
        tilde = Contour(
            [
                Segment(c - 1j * ytop, c + 0j, grade="end", grade_scale=gs),
                Segment(c + 0j, c + 1j * ytop, grade="start", grade_scale=gs),
                Arc(0.0, Rt, thc, 2.0 * math.pi - thc),
            ]
        )

        def f_r12a(z):
            return -s2g * rn * np.exp(
                (s - t) * N * g2_edge_centered(z, q, c)
                + s2g * (y - x) * rn * (np.log(z) - math.log(c))
                + (fs - ft) * (np.log(1.0 - q / z) - lq_c)
            ) / z

        v, e = integrate_single(f_r12a, tilde, tol)
        r12 += v
        e4 = max(e4, e)

    def f_r12b(z):
        # F12(z, c) collapses to exp(expo(z, s, x, fs)): S2bar(c; t) = 0 and
        # the (1-q/z)^{fs} factors of F12 and of the residue prefactor merge
        return (
            s2g * rn * (z * c - 1.0) / (z * (z * z - 1.0))
            * np.exp(expo(z, s, x, fs))
        )

    v, e = integrate_single(f_r12b, gam_s, tol)
    r12 += v
    e4 = max(e4, e)

    def f_r22a(z):
        return s2g * rn * np.exp(-expo(z, s, x, fs)) / (c * z - 1.0)

    def f_r22b(w):
        return s2g * rn * np.exp(-expo(w, t, y, ft)) / (c * w - 1.0)

    va, ea = integrate_single(f_r22a, circ_s, tol)
    vb, eb = integrate_single(f_r22b, circ_t, tol)
    r22 = va - vb
    e5 = max(ea, eb)

    err = max(e1, e2, e3, e4, e5)
    return {"I11": i11, "I12": i12, "I22": i22, "R12": r12, "R22": r22, "err": err}


def kernel_N_edge(s, x, t, y, params, N, theta=EDGE_THETA, R=None, tol=DEFAULT_TOL):
    """Assembled prelimit edge kernel K^N; converges to the Brownian kernel."""
    fwd = edge_prelimit_components(s, x, t, y, params, N, theta, R, tol)
    bwd = edge_prelimit_components(t, y, s, x, params, N, theta, R, tol)
    return KernelValue2x2(
        k11=fwd["I11"],
        k12=fwd["I12"] + fwd["R12"],
        k21=-(bwd["I12"] + bwd["R12"]),
        k22=fwd["I22"] + fwd["R22"],
        err=max(fwd["err"], bwd["err"]),
    )


def edge_lattice_point(a, params, N, kappa):
    """Nearest point of the edge lattice Lambda_kappa(N) to scaled value a."""
    cst = ScalingConstantsEdge(params.q, params.c)
    m = round(a * cst.sigma2 * math.sqrt(N) + cst.h2_kappa(kappa) * N)
    xval = (m - cst.h2_kappa(kappa) * N) / (cst.sigma2 * math.sqrt(N))
    return xval, m


# ---------------------------------------------------------------------------
# limiting kernels
# ---------------------------------------------------------------------------

def kernel_bm(s, x, t, y):
    """Brownian motion kernel: heat density minus the transition density."""
    if s <= 0.0 or t <= 0.0:
        raise ParameterError("kernel_bm needs s, t > 0")
    val = math.exp(-x * x / (2.0 * s)) / math.sqrt(2.0 * math.pi * s)
    if s > t:
        val -= math.exp(-((x - y) ** 2) / (2.0 * (s - t))) / math.sqrt(
            2.0 * math.pi * (s - t)
        )
    return val


def _airy_wedge(apex, phi, cubic_sign, quad_mag, lin_mag, tol):
    """Truncated wedge contour for exponents +-z^3/3 + a z^2 + b z with
    |a| <= quad_mag, |b| <= lin_mag; the probe over-estimates the magnitude,
    so the truncation is conservative."""

    def logmag(z):
        return (cubic_sign * z ** 3 / 3.0).real + quad_mag * np.abs(z) ** 2 + lin_mag * np.abs(z)

    L = truncate_wedge(apex, phi, logmag, start=4.0 + lin_mag + quad_mag)
    return Contour(wedge_pieces(apex, phi, L))


def hs_limit_components(s, x, t, y, tol=DEFAULT_TOL):
    """I and R blocks of the half-space limit kernel at (s,x), (t,y), s,t > 0."""
    if s <= 0.0 or t <= 0.0:
        raise ParameterError("half-space limit kernel needs s, t > 0")
    phi = math.pi / 3.0
    cz = _airy_wedge(1.0 + s, phi, +1.0, 0.0, abs(x) + 1.0, tol)
    cw = _airy_wedge(1.0 + t, phi, +1.0, 0.0, abs(y) + 1.0, tol)

    def H(z, w):
        return np.exp(z ** 3 / 3.0 + w ** 3 / 3.0 - x * z - y * w)

    def f11(z, w):
        return (z + s - w - t) * H(z, w) / (
            4.0 * (z + s + w + t) * (z + s) * (w + t)
        )

    def f12(z, w):
        return (z + s - w + t) * H(z, w) / (2.0 * (z + s) * (z + s + w - t))

    def f22(z, w):
        return (z - s - w + t) * H(z, w) / (z - s + w - t)

    i11, e1 = integrate_double(f11, cz, cw, tol)
    i12, e2 = integrate_double(f12, cz, cw, tol)
    i22, e3 = integrate_double(f22, cz, cw, tol)

    if s < t:
        r12 = -1.0 / math.sqrt(4.0 * math.pi * (t - s)) * math.exp(
            (-((s - t) ** 4) + 6.0 * (x + y) * (s - t) ** 2 + 3.0 * (x - y) ** 2)
            / (12.0 * (s - t))
        )
    else:
        r12 = 0.0
    h_st = cmath.exp(s ** 3 / 3.0 + t ** 3 / 3.0 - x * s - y * t).real
    pref = y - t * t - x + s * s
    r22 = (
        h_st * pref / (2.0 * math.sqrt(math.pi) * (t + s) ** 1.5)
        * math.exp(-(pref ** 2) / (4.0 * (t + s)))
    )
    return {
        "I11": i11, "I12": i12, "I22": i22, "R12": r12, "R22": r22,
        "err": max(e1, e2, e3),
    }


def kernel_hs_inf(s, x, t, y, tol=DEFAULT_TOL):
    """The half-space limit kernel K^{hs,inf} as a 2x2 block."""
    fwd = hs_limit_components(s, x, t, y, tol)
    bwd = hs_limit_components(t, y, s, x, tol)
    return KernelValue2x2(
        k11=fwd["I11"],
        k12=fwd["I12"] + fwd["R12"],
        k21=-(bwd["I12"] + bwd["R12"]),
        k22=fwd["I22"] + fwd["R22"],
        err=max(fwd["err"], bwd["err"]),
    )


def bulk_limit_components(s, x, t, y, consts, tol=DEFAULT_TOL):
    """I and R blocks of the bulk limit kernel (the K-infinity of the
    near-diagonal window); consts supplies f1 and sigma1."""
    f1, s1g = consts.f1, consts.sigma1
    phi3, phi23 = math.pi / 3.0, 2.0 * math.pi / 3.0
    cplus = _airy_wedge(s1g, phi3, +1.0, f1 * max(s, t), abs(x) + abs(y) + 1.0, tol)
    cminus = _airy_wedge(-s1g, phi23, -1.0, f1 * max(s, t), abs(x) + abs(y) + 1.0, tol)
    cplus_b = _airy_wedge(s1g * 1.0000003, phi3, +1.0, f1 * max(s, t),
                          abs(x) + abs(y) + 1.0, tol)
    cminus_b = _airy_wedge(-s1g * 1.0000003, phi23, -1.0, f1 * max(s, t),
                           abs(x) + abs(y) + 1.0, tol)

    def f11(z, w):
        e = z ** 3 / 3.0 + w ** 3 / 3.0 - f1 * s * z * z - f1 * t * w * w - x * z - y * w
        return np.exp(e) * (z - w) / (z * w * (z + w))

    def f12(z, w):
        e = z ** 3 / 3.0 - w ** 3 / 3.0 - f1 * s * z * z + f1 * t * w * w - x * z + y * w
        return np.exp(e) * (z + w) / (2.0 * z * (z - w))

    def f22(z, w):
        e = -(z ** 3) / 3.0 - w ** 3 / 3.0 + f1 * s * z * z + f1 * t * w * w + x * z + y * w
        return np.exp(e) * (z - w) / (4.0 * (z + w))

    i11, e1 = integrate_double(f11, cplus, cplus_b, tol)
    i12, e2 = integrate_double(f12, cplus, cminus, tol)
    i22, e3 = integrate_double(f22, cminus, cminus_b, tol)

    if s < t:
        r12 = -1.0 / math.sqrt(4.0 * math.pi * f1 * (t - s)) * math.exp(
            -((y - x) ** 2) / (4.0 * f1 * (t - s))
        )
    else:
        r12 = 0.0

    def f_r22(w):
        return w * np.exp(f1 * (s + t) * w * w + w * (y - x))

    # Gaussian-only exponent: decays like e^{-f1(s+t) r^2 / 2} along the
    # rays, so it needs its own (possibly much longer) truncation
    def logmag_r22(w):
        return (f1 * (s + t) * w * w + w * (y - x)).real

    r22_wedge = Contour(
        wedge_pieces(
            -s1g,
            phi23,
            truncate_wedge(-s1g, phi23, logmag_r22,
                           start=8.0 + 4.0 * (1.0 + abs(y - x)) / (f1 * (s + t))),
        )
    )
    vr22, e4 = integrate_single(f_r22, r22_wedge, tol)
    r22 = -0.5 * vr22
    return {
        "I11": i11, "I12": i12, "I22": i22, "R12": r12, "R22": r22,
        "err": max(e1, e2, e3, e4),
    }


def r22_limit_closed_form(s, x, t, y, f1):
    """Gaussian evaluation of the R22 limit integral after deforming the
    2pi/3 wedge to the imaginary axis."""
    a = f1 * (s + t)
    b = y - x
    return b / (8.0 * math.sqrt(math.pi) * a ** 1.5) * math.exp(-b * b / (4.0 * a))


def kernel_limit_bulk(s, x, t, y, consts, tol=DEFAULT_TOL):
    """Assembled bulk limit kernel K-infinity."""
    fwd = bulk_limit_components(s, x, t, y, consts, tol)
    bwd = bulk_limit_components(t, y, s, x, consts, tol)
    return KernelValue2x2(
        k11=fwd["I11"],
        k12=fwd["I12"] + fwd["R12"],
        k21=-(bwd["I12"] + bwd["R12"]),
        k22=fwd["I22"] + fwd["R22"],
        err=max(fwd["err"], bwd["err"]),
    )


def conjugation_factor(s, x, f1):
    """f(s, x) = 2 exp(s^3 f1^3 / 3 - (x + f1^2 s^2) f1 s)."""
    return 2.0 * math.exp(s ** 3 * f1 ** 3 / 3.0 - (x + f1 * f1 * s * s) * f1 * s)


def kernel_limit_bulk_from_hs(s, x, t, y, consts, tol=DEFAULT_TOL):
    """K-infinity obtained from the half-space kernel by the conjugation
    K_uv(s,x;t,y) = K^hs_uv(f1 s, x + f1^2 s^2; f1 t, y + f1^2 t^2) dressed
    with the factor f(s, x)."""
    f1 = consts.f1
    base = kernel_hs_inf(
        f1 * s, x + f1 * f1 * s * s, f1 * t, y + f1 * f1 * t * t, tol
    )
    fs = conjugation_factor(s, x, f1)
    ft = conjugation_factor(t, y, f1)
    return KernelValue2x2(
        k11=base.k11 * fs * ft,
        k12=base.k12 * fs / ft,
        k21=base.k21 * ft / fs,
        k22=base.k22 / (fs * ft),
        err=base.err,
    )


# ---------------------------------------------------------------------------
# steepest-descent diagnostics
# ---------------------------------------------------------------------------

def _fd_derivative(f, z0, order, h=1e-4, richardson=True):
    """Central finite difference of given order with optional Richardson."""

    def central(hh):
        if order == 1:
            return (f(z0 + hh) - f(z0 - hh)) / (2.0 * hh)
        return (f(z0 + hh) - 2.0 * f(z0) + f(z0 - hh)) / (hh * hh)

    d1 = central(h)
    if not richardson:
        return d1
    d2 = central(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def phase_diagnostics(q, c, kappas, h=1e-4, fd_tol=1e-6):
    """Run every steepest-descent sanity check on a (q, c, kappa) family.

    Returns a report dict with one entry per check carrying (ok, detail).
    """
    cst = ScalingConstantsEdge(q, c)
    report = {"params": (q, c), "checks": [], "ok": True}

    def add(name, ok, detail):
        report["checks"].append({"name": name, "ok": bool(ok), "detail": detail})
        report["ok"] = report["ok"] and bool(ok)

    sc = ScalingConstantsBulk(q)
    v = s1_bulk(np.array([1.0 + 0j]), q)[0]
    add("bulk_S1_at_1_vanishes", abs(v) < 1e-12, f"S1(1) = {v:.2e}")

    # cubic Taylor behavior of bulk S1 near 1: slope-4 log-log fit of the rest
    rs = np.geomspace(1e-3, 1e-2, 8)
    rows = []
    for th in (0.3, 1.1):
        zs = 1.0 + rs * cmath.exp(1j * th)
        rest = np.abs(
            s1_bulk(zs, q) - sc.sigma1 ** 3 * (zs - 1.0) ** 3 / 3.0
        )
        slope = np.polyfit(np.log(rs), np.log(rest), 1)[0]
        rows.append(slope)
        add(
            f"bulk_S1_quartic_rest_theta={th}",
            abs(slope - 4.0) < 0.2,
            f"log-log slope {slope:.3f}",
        )

    for kappa in kappas:
        zc = cst.z_crit(kappa)
        tag = f"kappa={kappa:.4g}"

        d1 = _fd_derivative(lambda z: s2_edge(z, kappa, q, c), c + 0j, 1, h)
        scale = max(1.0, abs(s2_edge_d2(c + 0j, kappa, q, c)))
        add(f"S2_prime_zero_{tag}", abs(d1) < fd_tol * scale, f"S2'(c) = {d1:.2e}")
        a1 = s2_edge_d1(c + 0j, kappa, q, c)
        add(f"S2_prime_analytic_{tag}", abs(a1) < 1e-10 * scale, f"analytic {a1:.2e}")

        d2 = _fd_derivative(lambda z: s2_edge(z, kappa, q, c), c + 0j, 2, h)
        target = cst.sigma2 ** 2 * (cst.kappa_bar - kappa) / (c * c)
        add(
            f"S2_second_formula_{tag}",
            abs(d2 - target) < fd_tol * max(1.0, abs(target)),
            f"fd {d2:.8g} vs sigma2^2 (kbar - k)/c^2 = {target:.8g}",
        )

        g1d = _fd_derivative(lambda z: g2_edge(z, q, c), c + 0j, 1, h)
        add(f"G2_prime_zero_{tag}", abs(g1d) < fd_tol, f"G2'(c) = {g1d:.2e}")
        g2d = _fd_derivative(lambda z: g2_edge(z, q, c), c + 0j, 2, h)
        gt = -cst.sigma2 ** 2 / (c * c)
        add(
            f"G2_second_formula_{tag}",
            abs(g2d - gt) < fd_tol * max(1.0, abs(gt)),
            f"fd {g2d:.8g} vs -sigma2^2/c^2 = {gt:.8g}",
        )

        ds1 = (s1_edge(zc + 0j, kappa, q) - s1_edge(c + 0j, kappa, q)).real
        ds2 = (s2_edge(zc + 0j, kappa, q, c) - s2_edge(c + 0j, kappa, q, c)).real
        add(f"S1_difference_negative_{tag}", ds1 < 0.0, f"S1(zc)-S1(c) = {ds1:.6g}")
        add(f"S2_difference_positive_{tag}", ds2 > 0.0, f"S2(zc)-S2(c) = {ds2:.6g}")

        kh = 1.0 / (1.0 + kappa)
        zs = np.array([0.7 + 0.2j, 1.1 - 0.4j, c + 0.3j])
        lhs1 = s1_edge(zs, kappa, q)
        rhs1 = (1.0 + kappa) * s_hat(zs, kh, q, c, 1)
        lhs2 = s2_edge(zs, kappa, q, c)
        rhs2 = (1.0 + kappa) * s_hat(zs, kh, q, c, 2)
        dev = max(np.max(np.abs(lhs1 - rhs1)), np.max(np.abs(lhs2 - rhs2)))
        add(f"S_to_Shat_identity_{tag}", dev < 1e-10, f"max dev {dev:.2e}")

        # decay along the theta-rays near c
        theta = EDGE_THETA
        eps1 = -(cst.sigma2 ** 2) * (cst.kappa_bar - kappa) / (4.0 * c * c) * math.cos(
            2.0 * theta
        )
        ok_decay = True
        worst = 0.0
        for r in np.linspace(1e-4, 0.05, 12):
            for sgn in (1.0, -1.0):
                z = c + r * cmath.exp(sgn * 1j * theta)
                val = (s2_edge(z, kappa, q, c) - s2_edge(c + 0j, kappa, q, c)).real
                worst = max(worst, val + eps1 * r * r)
                ok_decay = ok_decay and (val <= -eps1 * r * r + 1e-12)
        add(f"S2_ray_decay_{tag}", ok_decay, f"worst excess {worst:.2e}")

    # monotonicity of Re G2 on centered circles
    ok_mono = True
    for R in (0.5, 1.0, c, 1.0 / q * 0.9):
        th = np.linspace(1e-3, math.pi - 1e-3, 200)
        vals = g2_edge(R * np.exp(1j * th), q, c).real
        ok_mono = ok_mono and bool(np.all(np.diff(vals) > 0))
    add("G2_increasing_on_circles", ok_mono, "d/dtheta Re G2 > 0 sampled")

    return report


# ---------------------------------------------------------------------------
# batched coincident-point K12 (direct-sum oracle support)
# ---------------------------------------------------------------------------

def _diag_batch_eval(base_fn, zphase_fn, wphase_fn, cz, cw, xs, tol,
                     max_level=4):
    """Values sum_ij wz_i ww_j base(z, w) e^{zphase(z) x} e^{wphase(w) x} for
    each x, via one weighted-matrix build and two GEMMs per level."""
    prev = None
    level = 0
    pref = -1.0 / (4.0 * math.pi * math.pi)
    xs = np.asarray(xs, dtype=float)
    while level <= max_level:
        z, wz = cz.nodes(level)
        w, ww = cw.nodes(level)
        B = base_fn(z[:, None], w[None, :]) * wz[:, None] * ww[None, :]
        U = np.exp(np.multiply.outer(zphase_fn(z), xs))  # (nz, P)
        V = np.exp(np.multiply.outer(wphase_fn(w), xs))  # (nw, P)
        vals = pref * np.einsum("ip,ip->p", U, B @ V)
        mass = abs(pref) * float(
            np.max(np.einsum("ip,ip->p", np.abs(U), np.abs(B) @ np.abs(V)).real)
        )
        if prev is not None:
            err = float(np.max(np.abs(vals - prev)))
            scale = float(np.max(np.abs(vals)))
            if err <= max(tol * scale, tol * tol, 1e-13 * mass):
                return vals, max(err, 1e-15 * mass)
        prev = vals
        level += 1
    from .contours import QuadratureError

    raise QuadratureError("batched diagonal kernel did not converge", partial=prev)


def _diag_batch_single(base_fn, zphase_fn, contour, xs, tol, max_level=8):
    """(1/2 pi i) * integral of base(z) e^{zphase(z) x} per x, level-doubled."""
    xs = np.asarray(xs, dtype=float)
    prev = None
    level = 0
    while level <= max_level:
        z, wz = contour.nodes(level)
        B = base_fn(z) * wz
        U = np.exp(np.multiply.outer(zphase_fn(z), xs))
        vals = (B @ U) / (2j * math.pi)
        mass = float(np.max((np.abs(B) @ np.abs(U)).real)) / (2.0 * math.pi)
        if prev is not None:
            err = float(np.max(np.abs(vals - prev)))
            scale = float(np.max(np.abs(vals)))
            if err <= max(tol * scale, tol * tol, 1e-13 * mass):
                return vals, max(err, 1e-15 * mass)
        prev = vals
        level += 1
    from .contours import QuadratureError

    raise QuadratureError("batched single-contour kernel did not converge",
                          partial=prev)


def edge_k12_diag_batch(xs, params, N, kappa, theta=EDGE_THETA, R=None,
                        tol=1e-8):
    """K12(kappa, x; kappa, x) for an array of scaled lattice levels x."""
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    cst = ScalingConstantsEdge(q, c)
    if R is None:
        R = 2.0 / q
    s2g, rn = cst.sigma2, math.sqrt(N)
    fs = math.floor(kappa * N) - kappa * N
    lq_c = cmath.log(1.0 - q / c)
    gam = edge_gamma_contour(c, theta, R, N ** -0.5 / math.cos(theta),
                             grade_scale=min(0.2, N ** -0.5))
    circ = Contour([full_circle(0.0, cst.z_crit(kappa) + N ** -0.5)])
    xs = np.asarray(xs, dtype=float)

    def base(z, w):
        pre = (
            s2g * rn * (z * w - 1.0) * (z - c)
            / (z * (z - w) * (z * z - 1.0) * (w - c))
        )
        stat = (
            N * (s2_edge_centered(z, kappa, q, c) - s2_edge_centered(w, kappa, q, c))
            + fs * (np.log(1.0 - q / z) - np.log(1.0 - q / w))
        )
        return pre * np.exp(stat)

    i12, e1 = _diag_batch_eval(
        base,
        lambda z: -s2g * rn * (np.log(z) - math.log(c)),
        lambda w: s2g * rn * (np.log(w) - math.log(c)),
        gam, circ, xs, tol,
    )

    # R12 second term (the s<t heat-kernel part vanishes at coincident slices)
    def rbase(z):
        return (
            s2g * rn * (z * c - 1.0) / (z * (z * z - 1.0))
            * np.exp(N * s2_edge_centered(z, kappa, q, c)
                     + fs * (np.log(1.0 - q / z) - lq_c))
        )

    r12, e2 = _diag_batch_single(
        rbase, lambda z: -s2g * rn * (np.log(z) - math.log(c)), gam, xs, tol
    )
    return i12 + r12, max(e1, e2)


def bulk_k12_diag_batch(xs, params, N, t, tol=1e-8):
    """K12(t, x; t, x) for an array of scaled lattice levels x (bulk window).

    At coincident slices the heat-kernel part of R12 vanishes; the c > 1
    residue term remains.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    sc = ScalingConstantsBulk(q)
    s1g, n13 = sc.sigma1, N ** (1.0 / 3.0)
    Tt = math.floor(t * N ** (2.0 / 3.0))
    gp = bulk_contour(1.0, N, +1)
    gm = bulk_contour(-1.0, N, -1)
    xs = np.asarray(xs, dtype=float)

    def base(z, w):
        pre = s1g * n13 * (z * w - 1.0) / (z * (z - w) * (z * z - 1.0)) * (z - c) / (w - c)
        stat = N * (s1_bulk(z, q) - s1_bulk(w, q)) + Tt * (g1_bulk(z, q) - g1_bulk(w, q))
        return pre * np.exp(stat)

    i12, e1 = _diag_batch_eval(
        base,
        lambda z: -s1g * n13 * np.log(z),
        lambda w: s1g * n13 * np.log(w),
        gp, gm, xs, tol,
    )
    if c <= 1.0:
        return i12, e1

    s1_c = s1_bulk(np.asarray(c, dtype=complex), q)
    g1_c = g1_bulk(np.asarray(c, dtype=complex), q)

    def rbase(z):
        return (
            s1g * n13 * (z * c - 1.0) / (z * (z * z - 1.0))
            * np.exp(N * (s1_bulk(z, q) - s1_c) + Tt * (g1_bulk(z, q) - g1_c))
        )

    r12, e2 = _diag_batch_single(
        rbase, lambda z: -s1g * n13 * (np.log(z) - math.log(c)), gp, xs, tol
    )
    return i12 + r12, max(e1, e2)


# ---------------------------------------------------------------------------
# expected counts above a level
# ---------------------------------------------------------------------------

def expected_count_tail(a, params, N, regime, slice_value, theta=EDGE_THETA,
                        R=None, tol=DEFAULT_TOL):
    """E[#points >= a] on one slice, by the summed-kernel contour formulas.

    regime 'edge': the N^{1/2} window at kappa = slice_value (needs c > 1);
    regime 'bulk': the N^{1/3} window at time t = slice_value.  The level a
    is snapped up to the slice lattice.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    if regime == "edge":
        cst = ScalingConstantsEdge(q, c)
        if R is None:
            R = 2.0 / q
        s2g = cst.sigma2
        rn = math.sqrt(N)
        kap = slice_value
        m = math.ceil(a * s2g * rn + cst.h2_kappa(kap) * N - 1e-9)
        aN = (m - cst.h2_kappa(kap) * N) / (s2g * rn)
        fs = math.floor(kap * N) - kap * N
        lq_c = cmath.log(1.0 - q / c)
        gam = edge_gamma_contour(c, theta, R, N ** -0.5 / math.cos(theta),
                                 grade_scale=min(0.2, N ** -0.5))
        circ = Contour([full_circle(0.0, cst.z_crit(kap) + N ** -0.5)])

        def expo(z, aa):
            return (
                N * s2_edge_centered(z, kap, q, c)
                + fs * (np.log(1.0 - q / z) - lq_c)
                - s2g * aa * rn * (np.log(z) - math.log(c))
            )

        def fU(z, w):
            pre = (
                s2g * rn * (z * w - 1.0) * (z - c)
                / (z * (z - w) * (z * z - 1.0) * (w - c))
            )
            return pre * np.exp(expo(z, aN) - expo(w, aN)) / (1.0 - w / z) / (s2g * rn)

        def fV(z):
            return (
                (z * c - 1.0) / (z * (z * z - 1.0)) / (1.0 - c / z)
                * np.exp(expo(z, aN))
            )

        U, eU = integrate_double(fU, gam, circ, tol)
        V, eV = integrate_single(fV, gam, tol)
        return (U + V).real, max(eU, eV)

    if regime == "bulk":
        sc = ScalingConstantsBulk(q)
        s1g, n13 = sc.sigma1, N ** (1.0 / 3.0)
        t = slice_value
        Tt = math.floor(t * N ** (2.0 / 3.0))
        m = math.ceil(a * s1g * n13 + sc.h1 * N + sc.p1 * Tt - 1e-9)
        aN = (m - sc.h1 * N - sc.p1 * Tt) / (s1g * n13)
        gp = bulk_contour(1.0, N, +1)
        gm = bulk_contour(-1.0, N, -1)

        def expo(z, aa):
            return N * s1_bulk(z, q) + Tt * g1_bulk(z, q) - s1g * aa * n13 * np.log(z)

        def fU(z, w):
            pre = (z * w - 1.0) / ((z - w) ** 2 * (z * z - 1.0)) * (z - c) / (w - c)
            return pre * np.exp(expo(z, aN) - expo(w, aN))

        U, eU = integrate_double(fU, gp, gm, tol)
        V, eV = 0.0, 0.0
        if c > 1.0:

            def fV(z):
                return (
                    (z * c - 1.0) / ((z - c) * (z * z - 1.0))
                    * np.exp(expo(z, aN) - expo(np.asarray(c, dtype=complex), aN))
                )

            V, eV = integrate_single(fV, gp, tol)
        total = U.real + (V.real if c > 1.0 else 0.0) + (1.0 if c > 1.0 else 0.0)
        return total, max(eU, eV)

    raise ParameterError(f"unknown regime {regime!r}")
