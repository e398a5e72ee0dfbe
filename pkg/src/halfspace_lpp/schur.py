"""Pfaffian Schur process weights and samplers, interacting-pair partition
functions (series and contour forms), and the exact law of an interacting
pair at the origin.

Partitions are tuples of non-negative ints, weakly decreasing, trailing
zeros optional.  All weight computations exist in float (log-safe) form and,
where ratio tests demand exactness, in Fraction form.
"""

import cmath
import math
from fractions import Fraction

import numpy as np

from .model import ModelParams, ParameterError
from .lpp import sample_weights_batch, lambda_process_batch


class AccuracyError(RuntimeError):
    """Requested tolerance not reachable within the allowed truncation."""


class SupportError(ValueError):
    """Configuration outside the support of the measure."""


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def trim(lam):
    lam = tuple(lam)
    while lam and lam[-1] == 0:
        lam = lam[:-1]
    return lam


def is_partition(lam):
    lam = tuple(lam)
    return all(a >= b for a, b in zip(lam, lam[1:])) and all(a >= 0 for a in lam)


def interlaces(mu, lam):
    """True iff mu precedes lam: lam_1 >= mu_1 >= lam_2 >= mu_2 >= ..."""
    mu, lam = trim(mu), trim(lam)
    if len(mu) > len(lam):
        return False
    for i in range(len(lam)):
        m = mu[i] if i < len(mu) else 0
        if lam[i] < m:
            return False
        if i + 1 < len(lam) and m < lam[i + 1]:
            return False
    return True


def weight_sum(lam):
    return sum(lam)


def alt_sum(lam):
    return sum(v if i % 2 == 0 else -v for i, v in enumerate(lam))


def principal_spec_log(lam, q, N):
    """log s_lambda(q, ..., q) with N variables; -inf when len(lam) > N."""
    lam = trim(lam)
    if len(lam) > N:
        return -math.inf
    full = lam + (0,) * (N - len(lam))
    out = weight_sum(lam) * math.log(q) if weight_sum(lam) else 0.0
    for i in range(N):
        for j in range(i + 1, N):
            out += math.log(full[i] - full[j] + j - i) - math.log(j - i)
    return out


def principal_spec_fraction(lam, q, N):
    """Exact s_lambda(q^N) for rational q, as a Fraction."""
    lam = trim(lam)
    if len(lam) > N:
        return Fraction(0)
    full = lam + (0,) * (N - len(lam))
    out = Fraction(q) ** weight_sum(lam)
    for i in range(N):
        for j in range(i + 1, N):
            out *= Fraction(full[i] - full[j] + j - i, j - i)
    return out


# ---------------------------------------------------------------------------
# Schur process weight and sampler
# ---------------------------------------------------------------------------

def schur_weight(partitions, q, c, N):
    """Unnormalized weight of a partition sequence (lambda^0, ..., lambda^M).

    Zero signals off-support (broken interlacing or too many rows).
    """
    seq = [trim(p) for p in partitions]
    for a, b in zip(seq, seq[1:]):
        if not interlaces(a, b):
            return 0.0
    ls = principal_spec_log(seq[-1], q, N)
    if ls == -math.inf:
        return 0.0
    a0 = alt_sum(seq[0])
    if c == 0.0:
        tau = 1.0 if a0 == 0 else 0.0
    else:
        tau = c ** a0
    return tau * q ** (weight_sum(seq[-1]) - weight_sum(seq[0])) * math.exp(ls)


def schur_weight_fraction(partitions, q, c, N):
    """Exact weight for rational q, c (used by the ratio checks)."""
    seq = [trim(p) for p in partitions]
    for a, b in zip(seq, seq[1:]):
        if not interlaces(a, b):
            return Fraction(0)
    s = principal_spec_fraction(seq[-1], q, N)
    if s == 0:
        return Fraction(0)
    a0 = alt_sum(seq[0])
    c = Fraction(c)
    if c == 0:
        tau = Fraction(1) if a0 == 0 else Fraction(0)
    else:
        tau = c ** a0
    return tau * Fraction(q) ** (weight_sum(seq[-1]) - weight_sum(seq[0])) * s


def schur_normalization_log(q, c, N, M):
    """log Z for the Schur process: sum of all weights."""
    return -N * math.log(1.0 - c * q) - (N * (N - 1) // 2 + N * M) * math.log(1.0 - q * q)


def sample_schur_process_batch(N, M, params, rng, size, max_rows=None):
    """(size, K, M+1) array: entry [b, i, j] is lambda^j_{i+1} of sample b.

    Exact sampler through the LPP identity: rsk shapes of the symmetrized
    environment at corners (N+j, N).
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    W = sample_weights_batch(N + M, N, params, rng, size)
    return lambda_process_batch(W, N, M, max_curves=max_rows)


def sample_schur_process(N, M, params, rng):
    """One draw: list of partitions (lambda^0, ..., lambda^M)."""
    arr = sample_schur_process_batch(N, M, params, rng, 1)[0]
    return [trim(arr[:, j]) for j in range(M + 1)]


def conditional_ratio_check(seq_a, seq_b, q, c):
    """Weight ratio of two sequences sharing the final partition, against the
    closed form c^(delta alt) * q^(-delta sum) of the time-M conditional law.

    Exact rational arithmetic; returns (ratio, prediction).
    """
    a = [trim(p) for p in seq_a]
    b = [trim(p) for p in seq_b]
    if a[-1] != b[-1]:
        raise SupportError("sequences must agree at the final time")
    N = max(len(a[-1]), 1)
    wa = schur_weight_fraction(a, q, c, N)
    wb = schur_weight_fraction(b, q, c, N)
    if wa == 0 or wb == 0:
        raise SupportError("both sequences must be on-support")
    d_alt = alt_sum(a[0]) - alt_sum(b[0])
    d_sum = weight_sum(a[0]) - weight_sum(b[0])
    pred = Fraction(c) ** d_alt * Fraction(q) ** (-d_sum)
    return wa / wb, pred


# ---------------------------------------------------------------------------
# enumeration helpers (oracles for the distribution tests)
# ---------------------------------------------------------------------------

def partitions_up_to(max_weight, max_len):
    """All partitions with |lambda| <= max_weight and length <= max_len."""
    out = []

    def rec(prefix, remaining, cap):
        out.append(tuple(prefix))
        if len(prefix) == max_len:
            return
        for v in range(min(remaining, cap), 0, -1):
            rec(prefix + [v], remaining - v, v)

    rec([], max_weight, max_weight)
    return out


def interlacing_below(lam):
    """All mu with mu interlacing below lam (mu precedes lam)."""
    lam = trim(lam)
    if not lam:
        return [()]
    out = []

    def rec(i, prefix):
        if i == len(lam):
            out.append(trim(prefix))
            return
        lo = lam[i + 1] if i + 1 < len(lam) else 0
        hi = min(lam[i], prefix[-1]) if prefix else lam[i]
        for v in range(lo, hi + 1):
            rec(i + 1, prefix + [v])

    rec(0, [])
    return out


def enumerate_schur_support(N, M, q, c, weight_cutoff):
    """All sequences with |lambda^M| <= cutoff, with float weights.

    Returns (sequences, weights, tail_bound_on_missing_mass) where the tail
    bound covers sequences with |lambda^M| > cutoff, via the exact
    normalization Z minus the enumerated mass... the bound reported is the
    residual Z - sum(weights), which is exact up to float arithmetic.
    """
    seqs, weights = [], []

    def chains(lam, steps):
        if steps == 0:
            return [[lam]]
        out = []
        for mu in interlacing_below(lam):
            for chain in chains(mu, steps - 1):
                out.append(chain + [lam])
        return out

    for lam in partitions_up_to(weight_cutoff, N):
        for chain in chains(trim(lam), M):
            w = schur_weight(chain, q, c, N)
            if w > 0.0:
                seqs.append(tuple(chain))
                weights.append(w)
    Z = math.exp(schur_normalization_log(q, c, N, M))
    tail = max(Z - sum(weights), 0.0)
    return seqs, np.asarray(weights), tail


# ---------------------------------------------------------------------------
# interacting-pair partition function: series form
# ---------------------------------------------------------------------------

def _log_h(r, T1):
    """log of the complete homogeneous sum h_r in T1 unit variables,
    i.e. log C(T1 + r - 1, r); -inf for r < 0."""
    if r < 0:
        return -math.inf
    if r == 0 or T1 == 0:
        return 0.0 if r == 0 else -math.inf
    return math.lgamma(T1 + r) - math.lgamma(r + 1) - math.lgamma(T1)


def _log_jacobi_trudi(T1, a, b, ap, bp):
    """log(h_a h_b - h_ap h_bp), the interlacing-pair path count, with the
    guarantee h_a h_b >= h_ap h_bp.  Returns -inf when the count is zero."""
    la = _log_h(a, T1) + _log_h(b, T1)
    lb = _log_h(ap, T1) + _log_h(bp, T1)
    if la == -math.inf:
        return -math.inf
    if lb == -math.inf:
        return la
    if lb >= la:
        return -math.inf
    diff = -math.expm1(lb - la)
    return la + math.log(diff) if diff > 0.0 else -math.inf


def pair_path_count(T1, y, x):
    """Number of interlacing increasing path pairs from x at 0 to y at T1,
    as an exact integer (Lindstrom/Jacobi-Trudi determinant)."""
    y1, y2 = y
    x1, x2 = x
    if x1 < x2 or y1 < y2:
        return 0

    def h(r):
        return math.comb(T1 + r - 1, r) if r >= 0 else 0

    return h(y1 - x1) * h(y2 - x2) - h(y1 - x2 + 1) * h(y2 - x1 - 1)


def partition_fn_series(T1, y, params, tol=1e-12, max_terms=100000):
    """Interacting-pair normalization Z(T1, y; q, c) by direct summation.

    Returns (value, tail_bound); the tail bound is rigorous, from geometric
    domination of the term envelope.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    y1, y2 = y
    if y1 < y2:
        raise ParameterError("need y1 >= y2")
    delta = y1 - y2
    lq, lc = math.log(q), (math.log(c) if c > 0 else -math.inf)

    total = 0.0
    n = 0
    while True:
        block = 0.0
        d_hi = delta + n if c > 0 else 0
        for d in range(0, d_hi + 1):
            lw = (delta + 2 * n - d) * lq + (d * lc if d else 0.0)
            lcount = _log_jacobi_trudi(T1, delta + n - d, n, delta + n + 1, n - d - 1)
            if lcount > -math.inf:
                block += math.exp(lw + lcount)
        total += block
        # envelope pieces: (delta+n+1) h_{delta+n}^2 (q^{delta+2n} + (cq)^n c^delta)
        lh2 = 2.0 * _log_h(delta + n + 1, T1)
        lpre = math.log(delta + n + 2)
        p1 = lpre + lh2 + (delta + 2 * (n + 1)) * lq
        p2 = (
            lpre + lh2 + (n + 1) * (lq + lc) + delta * lc
            if c > 0
            else -math.inf
        )
        rho1 = q * q * ((T1 + delta + n + 1) / (delta + n + 2)) ** 2 * (delta + n + 3) / (
            delta + n + 2
        )
        rho2 = (
            c * q * ((T1 + delta + n + 1) / (delta + n + 2)) ** 2 * (delta + n + 3) / (delta + n + 2)
            if c > 0
            else 0.0
        )
        rho = max(rho1, rho2)
        if rho < 1.0:
            tail = (math.exp(p1) + (math.exp(p2) if p2 > -math.inf else 0.0)) / (1.0 - rho)
            if tail <= tol * max(total, 1e-300):
                return total, tail
        n += 1
        if n > max_terms:
            raise AccuracyError(
                f"series for Z({T1},{y}) did not reach tol={tol} within {max_terms} terms"
            )


# ---------------------------------------------------------------------------
# interacting-pair partition function: contour form
# ---------------------------------------------------------------------------

def _circle_trapezoid(f, radius, tol=1e-10, n0=64, nmax=1 << 17):
    """(1/2pi i) * closed circle integral of f, by doubling trapezoid rule.

    f must accept a complex ndarray.  Periodic integrand, so accuracy is
    spectral; stop when doubling moves the value by < tol relative.
    """
    n = n0
    prev = None
    while n <= nmax:
        theta = 2.0 * np.pi * np.arange(n) / n
        u = radius * np.exp(1j * theta)
        val = np.mean(f(u) * u)
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300):
            return val
        prev = val
        n *= 2
    raise AccuracyError(f"circle quadrature did not converge at {nmax} points")


def _contour_Z_scaled(T1, y, qhat, chat, r1, r2, tol):
    """Z via the two-circle formula, returned as (log_scale, scaled_value)."""
    delta = y[0] - y[1]

    def make_f(extra_pow, pole_fn, scale_out):
        def f(u):
            L = (
                -T1 * (np.log(1.0 - u) + np.log(1.0 - qhat * qhat / u))
                - extra_pow * np.log(u)
                - np.log(pole_fn(u))
                - scale_out
            )
            return np.exp(L)

        return f

    # common scale from the integrand magnitude at a probe set
    probes = r1 * np.exp(1j * np.linspace(0, 2 * np.pi, 64, endpoint=False))
    L1 = np.max(
        -T1 * (np.log(np.abs(1.0 - probes)) + np.log(np.abs(1.0 - qhat * qhat / probes)))
        - (delta + 1) * math.log(r1)
    )
    probes2 = r2 * np.exp(1j * np.linspace(0, 2 * np.pi, 64, endpoint=False))
    L2 = np.max(
        -T1 * (np.log(np.abs(1.0 - probes2)) + np.log(np.abs(1.0 - qhat * qhat / probes2)))
        - (delta + 3) * math.log(r2)
    )
    scale = max(L1, L2)

    f1 = make_f(delta + 1, lambda u: 1.0 - u * chat / qhat, scale)
    f2 = make_f(delta + 3, lambda u: 1.0 - qhat * chat / u, scale)
    i1 = _circle_trapezoid(f1, r1, tol)
    i2 = _circle_trapezoid(f2, r2, tol)
    val = qhat ** delta * i1 - qhat ** (delta + 2) * i2
    return scale, val


def default_contour_radii(q, c):
    """Admissible (r1, r2): r1 in (q^2, min(1, q/c)), r2 in (max(q^2, qc), 1)."""
    hi1 = min(1.0, q / c) if c > 0 else 1.0
    if hi1 <= q * q:
        raise ParameterError("no admissible r1: need q^2 < q/c")
    r1 = q if q * q < q < hi1 else 0.5 * (q * q + hi1)
    lo2 = max(q * q, q * c)
    if lo2 >= 1.0:
        raise ParameterError("no admissible r2: need max(q^2, qc) < 1")
    r2 = q if lo2 < q < 1.0 else 0.5 * (lo2 + 1.0)
    return r1, r2


def partition_fn_contour(T1, y, qhat, chat, r1=None, r2=None, tol=1e-11):
    """Z(T1, y; qhat, chat) by the two-circle contour formula.

    qhat, chat may be complex with |qhat| < 1, and the radii must satisfy
    r1 in (q^2, 1) with c r1 / q < 1 and r2 in (q^2, 1) with q c / r2 < 1,
    where q = |qhat|, c = |chat|.
    """
    q, c = abs(qhat), abs(chat)
    if r1 is None or r2 is None:
        d1, d2 = default_contour_radii(q, c)
        r1 = d1 if r1 is None else r1
        r2 = d2 if r2 is None else r2
    if not (q * q < r1 < 1.0 and c * r1 / q < 1.0):
        raise ParameterError(f"r1={r1} violates (q^2, 1) and c r1/q < 1")
    if not (q * q < r2 < 1.0 and q * c / r2 < 1.0):
        raise ParameterError(f"r2={r2} violates (q^2, 1) and qc/r2 < 1")
    scale, val = _contour_Z_scaled(T1, y, complex(qhat), complex(chat), r1, r2, tol)
    if scale > 700.0:
        raise AccuracyError(
            f"partition function magnitude e^{scale:.1f} overflows float; "
            "use characteristic_ratio for scale-free quantities"
        )
    return val * math.exp(scale)


def characteristic_ratio(T_n, y, params, s, t, b=1.0, tol=1e-11):
    """Joint characteristic function of the centered origin statistics of an
    interacting pair, e^{2 i p T_n s / (sigma sqrt(d_n))} Z(qhat, chat)/Z(q, c),
    with qhat = q e^{-i s/(sigma sqrt(d_n))}, chat = c e^{i t}, d_n = T_n / b.

    Its large-n limit is e^{-b s^2} (1-c)^2 / (1 - c e^{it})^2.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    d_n = T_n / b
    p = q / (1.0 - q)
    sigma = math.sqrt(p * (1.0 + p))
    qhat = q * cmath.exp(-1j * s / (sigma * math.sqrt(d_n)))
    chat = c * cmath.exp(1j * t)
    r1, r2 = default_contour_radii(q, c)
    sc_num, num = _contour_Z_scaled(T_n, y, qhat, chat, r1, r2, tol)
    sc_den, den = _contour_Z_scaled(T_n, y, complex(q), complex(c), r1, r2, tol)
    phase = cmath.exp(2j * p * T_n * s / (sigma * math.sqrt(d_n)))
    return phase * math.exp(sc_num - sc_den) * num / den


def characteristic_ratio_limit(c, s, t, b=1.0):
    """Limit target e^{-b s^2} (1-c)^2 / (1 - c e^{it})^2."""
    return math.exp(-b * s * s) * (1.0 - c) ** 2 / (1.0 - c * cmath.exp(1j * t)) ** 2


# ---------------------------------------------------------------------------
# exact origin law of an interacting pair
# ---------------------------------------------------------------------------

def origin_law(T1, y, params, tail_tol=1e-10, max_n=200000):
    """Exact joint law of (B1(0), B2(0)) under the interacting-pair measure.

    Marginalizing the uniform conditional paths leaves the mixture weights
    w(x1, x2) = c^{x1-x2} q^{y1+y2-x1-x2} * #paths(x -> y), with the count
    given by the 2x2 Jacobi-Trudi determinant.  Returns (x1, x2, p) arrays
    with sum(p) >= 1 - tail_tol of the true mass.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    y1, y2 = y
    delta = y1 - y2
    lq, lc = math.log(q), (math.log(c) if c > 0 else -math.inf)

    rows = []  # (n, d, logweight)
    log_total = -math.inf
    n = 0
    while True:
        d_hi = delta + n if c > 0 else 0
        block = []
        for d in range(0, d_hi + 1):
            lcount = _log_jacobi_trudi(T1, delta + n - d, n, delta + n + 1, n - d - 1)
            if lcount == -math.inf:
                continue
            lw = (delta + 2 * n - d) * lq + (d * lc if d else 0.0) + lcount
            block.append((n, d, lw))
        for item in block:
            log_total = np.logaddexp(log_total, item[2])
        rows.extend(block)
        lh2 = 2.0 * _log_h(delta + n + 1, T1)
        lpre = math.log(delta + n + 2)
        p1 = lpre + lh2 + (delta + 2 * (n + 1)) * lq
        p2 = lpre + lh2 + (n + 1) * (lq + lc) + delta * lc if c > 0 else -math.inf
        rho = max(
            q * q * ((T1 + delta + n + 1) / (delta + n + 2)) ** 2 * (delta + n + 3) / (delta + n + 2),
            (c * q * ((T1 + delta + n + 1) / (delta + n + 2)) ** 2 * (delta + n + 3) / (delta + n + 2))
            if c > 0
            else 0.0,
        )
        if rho < 1.0 and n > 0:
            ltail = np.logaddexp(p1, p2) - math.log1p(-rho)
            if ltail < log_total + math.log(tail_tol):
                break
        n += 1
        if n > max_n:
            raise AccuracyError("origin law truncation did not converge")

    ns = np.array([r[0] for r in rows])
    ds = np.array([r[1] for r in rows])
    lws = np.array([r[2] for r in rows])
    p = np.exp(lws - log_total)
    x2 = y2 - ns
    x1 = x2 + ds
    return x1, x2, p


def sample_origin_exact(T1, y, params, rng, size, tail_tol=1e-10):
    """(x1, x2) samples from the exact interacting-pair origin law."""
    x1, x2, p = origin_law(T1, y, params, tail_tol)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return x1[idx], x2[idx]


def origin_gap_law(c, kmax):
    """Limiting gap law P(V = k) = (1-c)^2 (k+1) c^k, k >= 0, truncated."""
    k = np.arange(kmax + 1)
    if c == 0.0:
        p = np.zeros(kmax + 1)
        p[0] = 1.0
        return p
    return (1.0 - c) ** 2 * (k + 1) * c ** k
