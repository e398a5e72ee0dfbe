"""Oriented piecewise contours in the complex plane and quadrature on them.

Pieces are segments and circular arcs with a [0, 1] parametrization.  Single
integrals use adaptive Gauss-Kronrod (15, 7) bisection per piece; double
integrals use tensor products of per-piece Gauss-Legendre panels, refined by
level doubling until the value stabilizes.  Pieces carry an optional
geometric panel grading toward one endpoint for integrands with a short
internal scale (steepest-descent wedges near a critical point).
"""

import math
from dataclasses import dataclass

import numpy as np

# Kronrod-15 nodes on [-1, 1] (positive half) and weights; the embedded
# Gauss-7 rule uses the odd-indexed nodes.
_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

_KNODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GWEIGHTS = np.zeros_like(_KWEIGHTS)
_GWEIGHTS[1:-1:2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[:-1][::-1]])

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class QuadratureError(RuntimeError):
    """Non-convergence; carries the partial value in .partial."""

    def __init__(self, msg, partial=None, estimate=None):
        super().__init__(msg)
        self.partial = partial
        self.estimate = estimate


class ContourPlacementError(ValueError):
    """Contour constraints (radii, pole distances) cannot be met."""


@dataclass
class Segment:
    """Straight piece from a to b; optional geometric grading.

    grade = 'start' or 'end' anchors panels of geometrically growing width at
    that endpoint, the smallest being about grade_scale of the length.
    """

    a: complex
    b: complex
    grade: str = None
    grade_scale: float = 0.125

    def point(self, t):
        return self.a + np.asarray(t) * (self.b - self.a)

    def derivative(self, t):
        return np.full(np.shape(t), self.b - self.a, dtype=complex)

    @property
    def start(self):
        return self.a

    @property
    def end(self):
        return self.b

    def base_breaks(self):
        if self.grade is None:
            return np.linspace(0.0, 1.0, 5)
        h = min(max(self.grade_scale, 1e-12), 0.5)
        pts = [0.0]
        x = h
        while x < 1.0:
            pts.append(x)
            x *= 2.0
        pts.append(1.0)
        pts = np.array(pts)
        return pts if self.grade == "start" else 1.0 - pts[::-1]


@dataclass
class Arc:
    """Circular arc center + radius e^{i theta}, theta from theta0 to theta1
    (counterclockwise when theta1 > theta0)."""

    center: complex
    radius: float
    theta0: float
    theta1: float
    grade: str = None
    grade_scale: float = 0.125

    def point(self, t):
        th = self.theta0 + np.asarray(t) * (self.theta1 - self.theta0)
        return self.center + self.radius * np.exp(1j * th)

    def derivative(self, t):
        th = self.theta0 + np.asarray(t) * (self.theta1 - self.theta0)
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * th)

    @property
    def start(self):
        return self.point(0.0)

    @property
    def end(self):
        return self.point(1.0)

    def base_breaks(self):
        if self.grade is None:
            span = abs(self.theta1 - self.theta0)
            n = max(4, int(math.ceil(span / (math.pi / 8))))
            return np.linspace(0.0, 1.0, n + 1)
        h = min(max(self.grade_scale, 1e-12), 0.5)
        pts = [0.0]
        x = h
        while x < 1.0:
            pts.append(x)
            x *= 2.0
        pts.append(1.0)
        pts = np.array(pts)
        return pts if self.grade == "start" else 1.0 - pts[::-1]


def full_circle(center, radius):
    """Positively oriented circle as a single arc piece."""
    return Arc(center, radius, -math.pi, math.pi)


@dataclass
class Contour:
    """Ordered list of pieces.  connected() verifies end-to-start chaining."""

    pieces: list

    def connected(self, tol=1e-12, closed=False):
        for p, q in zip(self.pieces, self.pieces[1:]):
            if abs(p.end - q.start) > tol * max(1.0, abs(p.end)):
                return False
        if closed and self.pieces:
            back = abs(self.pieces[-1].end - self.pieces[0].start)
            if back > tol * max(1.0, abs(self.pieces[-1].end)):
                return False
        return True

    def nodes(self, level):
        """Gauss-Legendre panel nodes; returns (points z_i, weights for dz)."""
        zs, ws = [], []
        for piece in self.pieces:
            breaks = _refine(piece.base_breaks(), level)
            t0 = breaks[:-1][:, None]
            t1 = breaks[1:][:, None]
            t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * _GL_NODES[None, :]
            w = 0.5 * (t1 - t0) * _GL_WEIGHTS[None, :]
            zs.append(piece.point(t.ravel()))
            ws.append((w.ravel()) * piece.derivative(t.ravel()))
        return np.concatenate(zs), np.concatenate(ws)

    def min_distance(self, points, samples_per_piece=512):
        """Min distance from the given points to a dense contour sampling."""
        if len(points) == 0:
            return math.inf
        t = np.linspace(0.0, 1.0, samples_per_piece)
        best = math.inf
        for piece in self.pieces:
            z = piece.point(t)
            for p in points:
                best = min(best, float(np.min(np.abs(z - p))))
        return best


def _refine(breaks, level):
    breaks = np.asarray(breaks, dtype=float)
    for _ in range(level):
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        breaks = np.sort(np.concatenate([breaks, mids]))
    return breaks


def wedge_pieces(apex, phi, length, grade_scale=None):
    """The two legs of an infinite wedge C^phi_apex truncated to `length`,
    oriented from apex + L e^{-i phi} up through the apex to apex + L e^{i phi}."""
    lo = apex + length * np.exp(-1j * phi)
    hi = apex + length * np.exp(1j * phi)
    gs = grade_scale if grade_scale is not None else 0.125
    return [
        Segment(lo, apex, grade="end", grade_scale=gs),
        Segment(apex, hi, grade="start", grade_scale=gs),
    ]


def truncate_wedge(apex, phi, log_magnitude, start=4.0, floor=-40.0, cap=1 << 12):
    """Truncation length for C^phi_apex: doubled until log10 |integrand| at
    both ray ends is below `floor` relative to the apex value."""
    ref = log_magnitude(np.array([apex + 1e-3 * np.exp(1j * phi)]))[0]
    L = start
    while L <= cap:
        ends = np.array([apex + L * np.exp(1j * phi), apex + L * np.exp(-1j * phi)])
        vals = log_magnitude(ends)
        if np.all(vals - ref < floor * math.log(10.0)):
            return L
        L *= 2.0
    raise QuadratureError(f"wedge truncation did not decay by 1e{floor} within L={cap}")


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod on a contour
# ---------------------------------------------------------------------------

def _gk15(f, piece, t0, t1):
    half = 0.5 * (t1 - t0)
    mid = 0.5 * (t0 + t1)
    t = mid + half * _KNODES
    vals = f(piece.point(t)) * piece.derivative(t)
    k = half * np.sum(_KWEIGHTS * vals)
    g = half * np.sum(_GWEIGHTS * vals)
    return k, abs(k - g)


def integrate_contour(f, contour, tol=1e-10, poles=(), max_depth=40,
                      pole_clearance=1e-6):
    """Adaptive complex line integral of f along the contour.

    Bisects each piece until the local Kronrod-Gauss discrepancy is below
    tol * max(running max of |partial integral|, tol).  Returns (value,
    error_estimate).  Raises QuadratureError (carrying the partial value)
    after max_depth bisections, and ContourPlacementError when a listed pole
    comes within pole_clearance of the contour.
    """
    if poles:
        d = contour.min_distance(list(poles))
        if d < pole_clearance:
            raise ContourPlacementError(
                f"pole within {d:.2e} of contour (clearance {pole_clearance})"
            )
    total = 0.0 + 0.0j
    err_total = 0.0
    runmax = 0.0
    for piece in contour.pieces:
        stack = [(0.0, 1.0, 0)]
        while stack:
            t0, t1, depth = stack.pop()
            val, err = _gk15(f, piece, t0, t1)
            thresh = tol * max(runmax, tol)
            if err <= thresh or depth >= max_depth:
                if depth >= max_depth and err > thresh:
                    raise QuadratureError(
                        f"GK bisection depth {max_depth} exceeded (err={err:.2e})",
                        partial=total + val,
                        estimate=err_total + err,
                    )
                total += val
                err_total += err
                runmax = max(runmax, abs(total))
            else:
                tm = 0.5 * (t0 + t1)
    # two halves; deeper one first keeps the stack small
                stack.append((t0, tm, depth + 1))
                stack.append((tm, t1, depth + 1))
    return total, err_total


def integrate_circle(f, radius, center=0.0, tol=1e-12, n0=64, nmax=1 << 17):
    """(1/2pi i) * closed circle integral by the doubling trapezoid rule.

    Spectrally accurate for integrands analytic near the circle; f must take
    ndarray input.
    """
    n = n0
    prev = None
    while n <= nmax:
        u = center + radius * np.exp(2j * np.pi * np.arange(n) / n)
        val = np.mean(f(u) * (u - center))
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300):
            return val, abs(val - prev)
        prev = val
        n *= 2
    raise QuadratureError(f"circle trapezoid not converged at {nmax} points",
                          partial=prev)


_CHUNK_ELEMENTS = 1 << 22  # bound on tensor block size, keeps memory flat


def _tensor_sums(F, z, wz, w, ww):
    """Sum of wz_i ww_j F(z_i, w_j) and of |wz_i ww_j F(z_i, w_j)|, chunked."""
    rows = max(1, _CHUNK_ELEMENTS // max(len(w), 1))
    total = 0.0 + 0.0j
    mass = 0.0
    for i0 in range(0, len(z), rows):
        sl = slice(i0, i0 + rows)
        vals = F(z[sl, None], w[None, :])
        total += np.einsum("i,j,ij->", wz[sl], ww, vals)
        mass += float(np.einsum("i,j,ij->", np.abs(wz[sl]), np.abs(ww), np.abs(vals)).real)
    return total, mass


def integrate_double(F, contour_z, contour_w, tol=1e-9, start_level=0,
                     max_level=6):
    """Tensor-product double contour integral (1/(2 pi i)^2) * iint F(z, w).

    F must broadcast over (z[:, None], w[None, :]) grids; it is evaluated in
    bounded-size blocks.  Levels double the panel count on both contours,
    and the level-to-level change is the reported error estimate.  Values
    are accepted relative to tol, floored at the roundoff scale of the
    integrand's L1 mass (a value below that floor is numerically zero).
    """
    prev = None
    level = start_level
    pref = -1.0 / (4.0 * math.pi * math.pi)
    while level <= max_level:
        z, wz = contour_z.nodes(level)
        w, ww = contour_w.nodes(level)
        raw, mass = _tensor_sums(F, z, wz, w, ww)
        val = pref * raw
        if prev is not None:
            err = abs(val - prev)
            floor = max(tol * tol, 1e-13 * abs(pref) * mass)
            if err <= max(tol * abs(val), floor):
                return val, max(err, 1e-15 * abs(pref) * mass)
        prev = val
        level += 1
    raise QuadratureError(
        f"double-contour quadrature not converged at level {max_level}",
        partial=prev,
    )


def integrate_single(F, contour, tol=1e-10, start_level=0, max_level=9):
    """(1/2 pi i) * contour integral by the same level-doubling panel scheme."""
    prev = None
    level = start_level
    pref = 1.0 / (2j * math.pi)
    while level <= max_level:
        z, wz = contour.nodes(level)
        vals = F(z)
        val = pref * np.sum(wz * vals)
        mass = float(np.sum(np.abs(wz) * np.abs(vals)).real) / (2.0 * math.pi)
        if prev is not None:
            err = abs(val - prev)
            floor = max(tol * tol, 1e-13 * mass)
            if err <= max(tol * abs(val), floor):
                return val, max(err, 1e-15 * mass)
        prev = val
        level += 1
    raise QuadratureError(
        f"single-contour quadrature not converged at level {max_level}",
        partial=prev,
    )
