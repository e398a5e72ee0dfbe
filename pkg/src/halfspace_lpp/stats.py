"""Empirical statistics of sampled ensembles and their comparison with the
exact kernel formulas: densities, pair correlations, tail counts, with
jackknife standard errors, plus CSV archive IO.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .model import ScalingConstantsBulk, ScalingConstantsEdge


class InputError(ValueError):
    pass


@dataclass
class LatticeSpec:
    """Slice lattice a * Z + b in scaled coordinates.

    Conversion to the integer index m (the level lambda_i - i) is exact;
    membership tests work on indices, never on floats.
    """

    a: float
    b: float

    def index_of(self, x):
        return int(round((x - self.b) / self.a))

    def x_of(self, m):
        return self.a * m + self.b

    @classmethod
    def bulk(cls, params, N, t):
        sc = ScalingConstantsBulk(params.q)
        Tt = math.floor(t * N ** (2.0 / 3.0))
        a = 1.0 / (sc.sigma1 * N ** (1.0 / 3.0))
        return cls(a=a, b=a * (-sc.h1 * N - sc.p1 * Tt))

    @classmethod
    def edge(cls, params, N, kappa):
        cst = ScalingConstantsEdge(params.q, params.c)
        a = 1.0 / (cst.sigma2 * math.sqrt(N))
        return cls(a=a, b=-cst.h2_kappa(kappa) * math.sqrt(N) / cst.sigma2)


def jackknife_mean(values):
    """(mean, jackknife standard error) along axis 0."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise InputError("need at least 2 samples for a standard error")
    mean = values.mean(axis=0)
    loo = (values.sum(axis=0) - values) / (n - 1)
    se = np.sqrt((n - 1) / n * ((loo - loo.mean(axis=0)) ** 2).sum(axis=0))
    return mean, se


@dataclass
class PointStats:
    """Per-level densities and tail counts of a sampled slice."""

    levels: np.ndarray
    density: np.ndarray
    density_se: np.ndarray
    mean_count: float
    count_se: float
    window: tuple


def empirical_point_stats(samples, slice_index, lattice, window, max_curves=None):
    """Densities rho_1(x) and window counts for one time slice of an archive.

    samples: (B, K, M+1) integer curve array; points are lambda_i - i.
    window: (lo, hi) in scaled coordinates; density is estimated at every
    lattice level inside.  Estimators are unbiased indicator means with
    jackknife errors.
    """
    samples = np.asarray(samples)
    if samples.shape[0] < 2:
        raise InputError("need at least 2 samples")
    K = samples.shape[1] if max_curves is None else min(max_curves, samples.shape[1])
    lam = samples[:, :K, slice_index]
    pts = lam - np.arange(1, K + 1)
    lo, hi = window
    m_lo = int(math.ceil((lo - lattice.b) / lattice.a - 1e-9))
    m_hi = int(math.floor((hi - lattice.b) / lattice.a + 1e-9))
    ms = np.arange(m_lo, m_hi + 1)
    ind = (pts[:, :, None] == ms[None, None, :]).any(axis=1).astype(float)
    density, density_se = jackknife_mean(ind)
    incount = ((pts >= m_lo) & (pts <= m_hi)).sum(axis=1).astype(float)
    mean_count, count_se = jackknife_mean(incount)
    return PointStats(
        levels=lattice.x_of(ms),
        density=density,
        density_se=density_se,
        mean_count=float(mean_count),
        count_se=float(count_se),
        window=(lo, hi),
    )


def empirical_tail_count(samples, slice_index, lattice, a, max_curves=None):
    """(mean, se) of #{i : scaled point >= a} at one slice."""
    samples = np.asarray(samples)
    K = samples.shape[1] if max_curves is None else min(max_curves, samples.shape[1])
    lam = samples[:, :K, slice_index]
    pts = lam - np.arange(1, K + 1)
    # exact integer comparison: point index m = lambda_i - i vs threshold index
    m_min = int(math.ceil((a - lattice.b) / lattice.a - 1e-9))
    counts = (pts >= m_min).sum(axis=1).astype(float)
    return jackknife_mean(counts)


def pair_correlation(samples, slice_pairs):
    """Empirical rho_2 for point pairs ((slice, m), (slice, m)) in index units."""
    samples = np.asarray(samples)
    K = samples.shape[1]
    out = []
    for (j1, m1), (j2, m2) in slice_pairs:
        p1 = samples[:, :, j1] - np.arange(1, K + 1)
        p2 = samples[:, :, j2] - np.arange(1, K + 1)
        ind = (np.any(p1 == m1, axis=1) & np.any(p2 == m2, axis=1)).astype(float)
        out.append(jackknife_mean(ind))
    return out


# ---------------------------------------------------------------------------
# archives
# ---------------------------------------------------------------------------

def write_curve_archive(path, samples):
    """CSV archive of a batch of line ensembles: sample_id,index,time,value."""
    samples = np.asarray(samples)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_id", "index", "time", "value"])
        B, K, T = samples.shape
        for b in range(B):
            for i in range(K):
                for t in range(T):
                    w.writerow([b, i + 1, t, int(samples[b, i, t])])


def read_curve_archive(path):
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    except (ValueError, OSError) as exc:
        raise InputError(f"cannot parse curve archive {path}: {exc}") from exc
    if data.size == 0:
        return np.zeros((0, 0, 0), dtype=np.int64)
    B = int(data[:, 0].max()) + 1
    K = int(data[:, 1].max())
    T = int(data[:, 2].max()) + 1
    out = np.zeros((B, K, T), dtype=np.int64)
    out[data[:, 0], data[:, 1] - 1, data[:, 2]] = data[:, 3]
    return out


def write_stats_csv(path, rows):
    """Stats table rows (slice, x_or_window, estimate, stderr, exact, z)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slice", "x_or_window", "estimate", "stderr", "exact", "z_score"])
        for r in rows:
            w.writerow([r[0], r[1], repr(float(r[2])), repr(float(r[3])),
                        repr(float(r[4])), repr(float(r[5]))])
