"""Symmetrized geometric LPP: environment sampling, last passage times, the
RSK shape hierarchy, and the interlacing line ensembles built from it.

Conventions.  A weight array is a plain (m, n) int64 ndarray indexed from 0,
so w[i-1, j-1] is the weight at lattice point (i, j).  Partitions are tuples
of ints with trailing zeros stripped.  The diagonal weights are Geom(c*q),
off-diagonal Geom(q^2), mirrored across the diagonal wherever both mirror
cells fall inside the rectangle.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, ParameterError


class BoundsError(IndexError):
    """Requested corner lies outside the stored weight array."""


class ResourceError(RuntimeError):
    """Instance too large for the exhaustive oracle."""


BRUTE_FORCE_CELL_CAP = 16


# ---------------------------------------------------------------------------
# environment sampling
# ---------------------------------------------------------------------------

def geometric_icdf(u, alpha):
    """Inverse CDF of Geom(alpha): mass alpha^k (1-alpha) on k >= 0.

    alpha = 0 degenerates to the zero distribution.
    """
    u = np.asarray(u)
    if alpha == 0.0:
        return np.zeros(u.shape, dtype=np.int64)
    return np.floor(np.log(u) / np.log(alpha)).astype(np.int64)


def sample_weights_batch(m, n, params, rng, size):
    """(size, m, n) array of symmetrized geometric environments."""
    if m < 1 or n < 1:
        raise ParameterError(f"grid must be nonempty, got m={m}, n={n}")
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q, c = params.q, params.c
    w = geometric_icdf(rng.random((size, m, n)), q * q)
    r = min(m, n)
    # mirror the r x r block where both (i,j) and (j,i) are visible
    iu = np.triu_indices(r, k=1)
    w[:, iu[1], iu[0]] = w[:, iu[0], iu[1]]
    d = np.arange(r)
    w[:, d, d] = geometric_icdf(rng.random((size, r)), c * q)
    return w


def sample_weights(m, n, params, rng):
    """A single symmetrized geometric environment as an (m, n) int64 array."""
    return sample_weights_batch(m, n, params, rng, 1)[0]


# ---------------------------------------------------------------------------
# last passage times
# ---------------------------------------------------------------------------

def _check_corner(W, m, n):
    if not (1 <= m <= W.shape[0] and 1 <= n <= W.shape[1]):
        raise BoundsError(
            f"corner ({m},{n}) outside weight array of shape {W.shape}"
        )


def lpp_g1_grid(W):
    """Full table of last passage times G_1(i, j) for the given environment.

    G_1(i,j) = w_ij + max(G_1(i-1,j), G_1(i,j-1)); each row is a max-plus
    prefix scan, done with cumulative sums and a running maximum.
    """
    W = np.asarray(W, dtype=np.int64)
    m, n = W.shape
    G = np.empty((m, n), dtype=np.int64)
    up = np.full(n, np.iinfo(np.int64).min // 2, dtype=np.int64)
    up[0] = 0
    for i in range(m):
        csum = np.cumsum(W[i])
        shifted = np.concatenate(([0], csum[:-1]))
        G[i] = csum + np.maximum.accumulate(up - shifted)
        up = G[i]
    return G


def lpp_g1(W, m, n):
    """Last passage time G_1(m, n): max weight of an up-right path (1,1)->(m,n)."""
    W = np.asarray(W)
    _check_corner(W, m, n)
    return int(lpp_g1_grid(W[:m, :n])[m - 1, n - 1])


# ---------------------------------------------------------------------------
# RSK row insertion on count vectors
# ---------------------------------------------------------------------------
#
# Tableau rows are stored as count vectors over the alphabet 1..n, batched over
# samples: each row is a (B, n) int64 array, entry [b, v] the multiplicity of
# letter v+1.  Inserting a weakly increasing word with counts a into a row with
# counts r bumps, for each letter value v in increasing order, the smallest
# remaining entries larger than v.  Writing A[u] = sum_{v<u} a[v] and
# R[u] = sum_{v<=u} r[v], the cumulative bumped count satisfies the scan
#     B[u] = min(B[u-1] + r[u], A[u]),   B[-1] = 0,
# whose solution is B[u] = R[u] + min(0, min_{v<=u}(A[v] - R[v])).


def _insert_into_row(row, incoming):
    """One multiset row insertion step; returns (new_row, bumped) counts."""
    A = np.zeros_like(incoming)
    A[:, 1:] = np.cumsum(incoming, axis=1)[:, :-1]
    R = np.cumsum(row, axis=1)
    runmin = np.minimum(np.minimum.accumulate(A - R, axis=1), 0)
    B = R + runmin
    bumped = np.diff(B, axis=1, prepend=0)
    return row - bumped + incoming, bumped


class RSKTableau:
    """Batched semistandard tableau built by multiset row insertion.

    Tracks at most max_rows tableau rows; bumping out of the last tracked row
    is discarded, which leaves the tracked rows (hence the first max_rows
    parts of the shape) exact.
    """

    def __init__(self, batch, n, max_rows):
        self.batch = batch
        self.n = n
        self.max_rows = max_rows
        self.rows = []

    def insert_counts(self, counts):
        incoming = np.ascontiguousarray(counts, dtype=np.int64)
        for k in range(len(self.rows)):
            if not incoming.any():
                return
            self.rows[k], incoming = _insert_into_row(self.rows[k], incoming)
        while incoming.any() and len(self.rows) < self.max_rows:
            row = np.zeros((self.batch, self.n), dtype=np.int64)
            self.rows.append(row)
            self.rows[-1], incoming = _insert_into_row(row, incoming)

    def shape(self):
        """(batch, max_rows) array of row lengths (trailing rows zero)."""
        out = np.zeros((self.batch, self.max_rows), dtype=np.int64)
        for k, row in enumerate(self.rows):
            out[:, k] = row.sum(axis=1)
        return out


def rsk_shape_batch(W_batch, m, n, max_rows=None):
    """Shapes lambda(m, n) for a batch of environments, as (B, max_rows)."""
    W_batch = np.asarray(W_batch)
    if max_rows is None:
        max_rows = min(m, n)
    tab = RSKTableau(W_batch.shape[0], n, max_rows)
    for i in range(m):
        tab.insert_counts(W_batch[:, i, :n])
    return tab.shape()


def rsk_shape(W, m, n):
    """Partition lambda(m, n); its prefix sums are the hierarchy G_k(m, n)."""
    W = np.asarray(W)
    _check_corner(W, m, n)
    shape = rsk_shape_batch(W[None, :m, :n], m, n)[0]
    nz = np.nonzero(shape)[0]
    return tuple(int(v) for v in shape[: nz[-1] + 1]) if nz.size else ()


# ---------------------------------------------------------------------------
# exhaustive disjoint-path oracle
# ---------------------------------------------------------------------------

def lpp_gk_bruteforce(W, m, n, k):
    """Exact G_k(m, n) by enumerating k vertex-disjoint up-right path tuples.

    Path i runs from (1, i) to (m, n-k+i).  States are the per-row end
    columns of the (automatically non-crossing) paths.  Hard cap m*n <= 16.
    For k > min(m, n) the covering convention G_k = sum(W) applies.
    """
    W = np.asarray(W, dtype=np.int64)
    _check_corner(W, m, n)
    if m * n > BRUTE_FORCE_CELL_CAP:
        raise ResourceError(
            f"brute-force oracle capped at m*n <= {BRUTE_FORCE_CELL_CAP}, got {m * n}"
        )
    if k < 1:
        raise ParameterError("k must be >= 1")
    if k > min(m, n):
        return int(W[:m, :n].sum())

    prefix = np.zeros((m, n + 1), dtype=np.int64)
    prefix[:, 1:] = np.cumsum(W[:m, :n], axis=1)

    def interval_sum(row, a, b):
        # inclusive columns a..b, 1-based
        return int(prefix[row, b] - prefix[row, a - 1])

    def extensions(entry_cols, row, final):
        """All end-column tuples for this row, with the row's added weight."""
        if final:
            target = tuple(n - k + i + 1 for i in range(k))
            ok = all(entry_cols[i] <= target[i] for i in range(k)) and all(
                target[i] < entry_cols[i + 1] for i in range(k - 1)
            )
            if ok:
                yield target, sum(
                    interval_sum(row, entry_cols[i], target[i]) for i in range(k)
                )
            return
        ranges = []
        for i in range(k):
            hi = entry_cols[i + 1] - 1 if i + 1 < k else n
            if entry_cols[i] > hi:
                return
            ranges.append(range(entry_cols[i], hi + 1))
        for ends in itertools.product(*ranges):
            if all(ends[i] < entry_cols[i + 1] for i in range(k - 1)):
                yield ends, sum(
                    interval_sum(row, entry_cols[i], ends[i]) for i in range(k)
                )

    starts = tuple(range(1, k + 1))
    dp = {}
    for ends, wsum in extensions(starts, 0, final=(m == 1)):
        dp[ends] = max(dp.get(ends, -1), wsum)
    for row in range(1, m):
        nxt = {}
        final = row == m - 1
        for cols, val in dp.items():
            for ends, wsum in extensions(cols, row, final):
                tot = val + wsum
                if nxt.get(ends, -1) < tot:
                    nxt[ends] = tot
        dp = nxt
    if not dp:
        raise ParameterError(f"no disjoint {k}-tuple of paths on a {m}x{n} grid")
    return int(max(dp.values()))


# ---------------------------------------------------------------------------
# line ensembles
# ---------------------------------------------------------------------------

@dataclass
class DiscreteLineEnsemble:
    """Curves L_i(t) = lambda_i(t + N, N) on t in [[0, M]], i from 1.

    curves has shape (n_curves, M+1); deeper curves are identically zero by
    the covering convention and are reconstructible as zero rows.
    """

    curves: np.ndarray
    N: int
    q: float
    c: float

    @property
    def n_curves(self):
        return self.curves.shape[0]

    @property
    def horizon(self):
        return self.curves.shape[1] - 1

    def curve(self, i):
        """1-based curve index; indices beyond storage are zero curves."""
        if i <= self.n_curves:
            return self.curves[i - 1]
        return np.zeros(self.horizon + 1, dtype=np.int64)

    def value(self, i, t):
        """Linear interpolation of curve i at real time t in [0, horizon]."""
        if not (0.0 <= t <= self.horizon):
            raise BoundsError(f"time {t} outside [0, {self.horizon}]")
        c = self.curve(i)
        lo = int(np.floor(t))
        if lo == self.horizon:
            return float(c[lo])
        frac = t - lo
        return float(c[lo]) * (1.0 - frac) + float(c[lo + 1]) * frac

    def validate(self):
        """Exact monotonicity and interlacing checks; raises on violation."""
        c = self.curves
        if c.size and np.any(np.diff(c, axis=1) < 0):
            raise AssertionError("curve not non-decreasing in t")
        if c.shape[0] > 1 and np.any(c[:-1, :-1] < c[1:, 1:]):
            raise AssertionError("interlacing lambda_i(t-1) >= lambda_{i+1}(t) violated")
        return True

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("index,time,value\n")
            for i in range(self.n_curves):
                for t in range(self.horizon + 1):
                    fh.write(f"{i + 1},{t},{self.curves[i, t]}\n")

    @classmethod
    def from_csv(cls, path, N=0, q=0.0, c=0.0):
        data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
        k = int(data[:, 0].max())
        T = int(data[:, 1].max())
        curves = np.zeros((k, T + 1), dtype=np.int64)
        curves[data[:, 0] - 1, data[:, 1]] = data[:, 2]
        return cls(curves=curves, N=N, q=q, c=c)


def lambda_process_batch(W_batch, N, M, max_curves=None):
    """(B, K, M+1) array of curves L_i(t) = lambda_i(t+N, N) for a batch."""
    W_batch = np.asarray(W_batch)
    B, rows, cols = W_batch.shape
    if rows < N + M or cols < N:
        raise BoundsError(
            f"need a ({N + M}, {N}) environment, got ({rows}, {cols})"
        )
    K = min(N, max_curves) if max_curves else N
    tab = RSKTableau(B, N, K)
    out = np.zeros((B, K, M + 1), dtype=np.int64)
    for i in range(N + M):
        tab.insert_counts(W_batch[:, i, :N])
        if i >= N - 1:
            out[:, :, i - N + 1] = tab.shape()
    return out


def lambda_process(W, N, M, params=None, max_curves=None):
    """DiscreteLineEnsemble of the interlacing curves for one environment."""
    q, c = (params.q, params.c) if params is not None else (0.0, 0.0)
    curves = lambda_process_batch(np.asarray(W)[None], N, M, max_curves)[0]
    ens = DiscreteLineEnsemble(curves=curves, N=N, q=q, c=c)
    ens.validate()
    return ens


def sample_top_curves(N, M, params, rng, size, n_curves=2):
    """Stream-sample `size` environments on [[1, N+M]] x [[1, N]] and return
    the top `n_curves` curves as a (size, n_curves, M+1) array.

    Rows beyond N have no mirror cell inside the rectangle and are generated
    on the fly, so the full environment is never materialized.  Samples are
    processed in fixed-size chunks (a deterministic function of N) to bound
    memory at large batch sizes without breaking seed reproducibility.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    q = params.q
    chunk = max(1, (1 << 25) // max(N * N, 1))
    if size > chunk:
        parts = [
            sample_top_curves(N, M, params, rng, min(chunk, size - i0), n_curves)
            for i0 in range(0, size, chunk)
        ]
        return np.concatenate(parts, axis=0)
    top = sample_weights_batch(N, N, params, rng, size)
    tab = RSKTableau(size, N, n_curves)
    out = np.zeros((size, n_curves, M + 1), dtype=np.int64)
    for i in range(N):
        tab.insert_counts(top[:, i])
    out[:, :, 0] = tab.shape()
    del top
    for t in range(1, M + 1):
        row = geometric_icdf(rng.random((size, N)), q * q)
        tab.insert_counts(row)
        out[:, :, t] = tab.shape()
    return out


# ---------------------------------------------------------------------------
# rescaled curves
# ---------------------------------------------------------------------------

def rescale_bulk(ens, N, consts, t_grid, curve_indices=None):
    """Centered curves sigma^-1 N^-1/3 (L_i(t N^2/3) - 2qN/(1-q) - q t N^2/3/(1-q)).

    Returns an array of shape (len(curve_indices), len(t_grid)).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if curve_indices is None:
        curve_indices = range(1, ens.n_curves + 1)
    curve_indices = list(curve_indices)
    q = consts.q
    times = t_grid * N ** (2.0 / 3.0)
    if times.size and times.max() > ens.horizon:
        raise BoundsError(
            f"grid reaches t*N^(2/3) = {times.max():.1f} beyond horizon {ens.horizon}"
        )
    center = 2.0 * q * N / (1.0 - q) + q * times / (1.0 - q)
    out = np.empty((len(curve_indices), t_grid.size))
    for r, i in enumerate(curve_indices):
        vals = np.array([ens.value(i, t) for t in times])
        out[r] = (vals - center) / (consts.sigma * N ** (1.0 / 3.0))
    return out


def rescale_top(ens, N, consts, t_grid):
    """Top-curve fluctuation field on [0, kappa_bar): the N^{1/2} window."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size and t_grid.max() >= consts.kappa_bar:
        raise ParameterError(
            f"t grid must stay below kappa_bar = {consts.kappa_bar:.6g}"
        )
    times = t_grid * N
    if times.size and times.max() > ens.horizon:
        raise BoundsError("grid beyond ensemble horizon")
    scale = (consts.p_top * (1.0 + consts.p_top)) ** -0.5 * N ** -0.5
    vals = np.array([ens.value(1, t) for t in times])
    return scale * (vals - consts.C_top * N - consts.p_top * times)


def rescale_top_batch(top_vals, N, consts, t_grid):
    """Same as rescale_top for a (B, M+1) array of top-curve values; the grid
    must hit integer times."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size and t_grid.max() >= consts.kappa_bar:
        raise ParameterError("t grid must stay below kappa_bar")
    times = t_grid * N
    idx = np.rint(times).astype(int)
    if np.max(np.abs(times - idx)) > 1e-9:
        raise ParameterError("batch rescaling requires integer times t*N")
    scale = (consts.p_top * (1.0 + consts.p_top)) ** -0.5 * N ** -0.5
    return scale * (top_vals[:, idx] - consts.C_top * N - consts.p_top * times)
