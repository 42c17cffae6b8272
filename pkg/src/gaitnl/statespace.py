"""State-space reconstruction parameters and delay embedding.

The time lag comes from the first local minimum of the average mutual
information curve; the embedding dimension from the false-nearest-neighbor
fraction dropping below a threshold. Both feed the recurrence and Lyapunov
estimators downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .data import series_values
from .errors import DegenerateSeries, SeriesTooShort

DEFAULT_N_BINS = 16
DEFAULT_R_TOL = 15.0
DEFAULT_A_TOL = 2.0
DEFAULT_DROP_THRESHOLD = 0.01


@dataclass(frozen=True)
class EmbeddingParams:
    """Time lag (samples) and embedding dimension for delay reconstruction."""

    tau: int
    dim: int

    def __post_init__(self):
        if self.tau < 1 or self.dim < 1:
            raise ValueError("tau and dim must be >= 1")


@dataclass(frozen=True)
class AmiCurve:
    lags: np.ndarray           # 0..max_lag
    ami_nats: np.ndarray       # mutual information per lag, nats
    selected_lag: int          # first local minimum, else max_lag


@dataclass(frozen=True)
class FnnCurve:
    dims: np.ndarray           # 1..max_dim
    fnn_fraction: np.ndarray   # false-neighbor fraction per dimension
    selected_dim: int
    converged: bool            # False when no dimension fell below threshold


def bin_indices(values: np.ndarray, n_bins: int) -> np.ndarray:
    """Equal-width bin index per sample over the series' own [min, max].

    The maximum maps into the last bin. Pinned here so independent
    re-implementations agree bin-for-bin.
    """
    lo = values.min()
    hi = values.max()
    if hi == lo:
        raise DegenerateSeries("zero variance: histogram collapses to one bin")
    idx = np.floor((values - lo) * (n_bins / (hi - lo))).astype(np.int64)
    return np.minimum(idx, n_bins - 1)


def _mi_nats(joint: np.ndarray) -> float:
    total = joint.sum()
    p = joint / total
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    nz = p > 0
    outer = px[:, None] * py[None, :]
    # plug-in MI is nonnegative; clamp float-rounding residue
    return max(0.0, float(np.sum(p[nz] * (np.log(p[nz]) - np.log(outer[nz])))))


def ami(x, y=None, max_lag: int = 50, n_bins: int = DEFAULT_N_BINS) -> AmiCurve:
    """Average mutual information of (x[t], y[t+lag]) over equal-width bins.

    ``y=None`` means self-AMI, the canonical lag-selection use. Values are in
    nats. ``selected_lag`` is the smallest lag l with
    ami[l-1] > ami[l] <= ami[l+1], else ``max_lag``.
    """
    xv = series_values(x)
    yv = xv if y is None else series_values(y)
    if xv.size != yv.size:
        raise SeriesTooShort("x and y must have equal length")
    n = xv.size
    if n < 4 * n_bins:
        raise SeriesTooShort(f"need at least {4 * n_bins} samples, got {n}")
    if not max_lag < n / 2:
        raise SeriesTooShort(f"max_lag {max_lag} must be < len/2 = {n / 2}")
    bx = bin_indices(xv, n_bins)
    by = bin_indices(yv, n_bins)
    values = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        m = n - lag
        codes = bx[:m] * n_bins + by[lag:lag + m]
        joint = np.bincount(codes, minlength=n_bins * n_bins).reshape(n_bins, n_bins)
        values[lag] = _mi_nats(joint)
    selected = max_lag
    for lag in range(1, max_lag):
        if values[lag - 1] > values[lag] <= values[lag + 1]:
            selected = lag
            break
    return AmiCurve(np.arange(max_lag + 1), values, selected)


def embed(x, params: EmbeddingParams) -> np.ndarray:
    """Delay embedding: row i = (x[i], x[i+tau], ..., x[i+(dim-1)*tau])."""
    xv = series_values(x)
    tau, dim = params.tau, params.dim
    span = (dim - 1) * tau
    if xv.size < span + 1:
        raise SeriesTooShort(
            f"need at least {span + 1} samples for tau={tau}, dim={dim}; got {xv.size}"
        )
    rows = xv.size - span
    out = np.empty((rows, dim))
    for k in range(dim):
        out[:, k] = xv[k * tau: k * tau + rows]
    return out


def nearest_neighbors_excluding(
    points: np.ndarray, exclude: int, tree: cKDTree | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean nearest neighbor per point with |i-j| <= exclude ruled out.

    Returns (indices, distances); index -1 where no candidate exists. Queries
    2*exclude+2 nearest, which always contains the globally nearest valid
    point because the exclusion window holds at most 2*exclude+1 points.
    """
    n = points.shape[0]
    if tree is None:
        tree = cKDTree(points)
    k = min(n, 2 * exclude + 2)
    dists, idxs = tree.query(points, k=k)
    if k == 1:
        dists = dists[:, None]
        idxs = idxs[:, None]
    own = np.arange(n)[:, None]
    valid = np.abs(idxs - own) > exclude
    first = np.argmax(valid, axis=1)
    found = valid[np.arange(n), first]
    nn_idx = np.where(found, idxs[np.arange(n), first], -1)
    nn_dist = np.where(found, dists[np.arange(n), first], np.inf)
    return nn_idx, nn_dist


def fnn(
    x,
    tau: int,
    max_dim: int = 10,
    r_tol: float = DEFAULT_R_TOL,
    a_tol: float = DEFAULT_A_TOL,
    drop_threshold: float = DEFAULT_DROP_THRESHOLD,
) -> FnnCurve:
    """False-nearest-neighbor fraction per embedding dimension.

    A neighbor is false when the extra-coordinate distance ratio exceeds
    ``r_tol`` or the (d+1)-dimensional distance exceeds ``a_tol`` times the
    series standard deviation. Temporally adjacent points within one ``tau``
    are excluded from the neighbor search.
    """
    xv = series_values(x)
    n = xv.size
    if not n > max_dim * tau + 1:
        raise SeriesTooShort(
            f"need more than {max_dim * tau + 1} samples for max_dim={max_dim}, "
            f"tau={tau}; got {n}"
        )
    sigma = float(np.std(xv))
    if sigma == 0.0:
        raise DegenerateSeries("zero variance series")
    fractions = np.empty(max_dim)
    for d in range(1, max_dim + 1):
        m = n - d * tau                       # points whose next coordinate exists
        pts = np.empty((m, d))
        for k in range(d):
            pts[:, k] = xv[k * tau: k * tau + m]
        nn_idx, nn_dist = nearest_neighbors_excluding(pts, exclude=tau)
        i = np.arange(m)
        j = nn_idx
        has_nn = j >= 0
        j_safe = np.where(has_nn, j, 0)
        delta = np.abs(xv[i + d * tau] - xv[j_safe + d * tau])
        rd = nn_dist
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rd > 0, delta / np.where(rd > 0, rd, 1.0), np.inf)
        ratio = np.where((rd == 0) & (delta == 0), 0.0, ratio)
        new_dist = np.sqrt(rd * rd + delta * delta)
        false = (ratio > r_tol) | (new_dist > a_tol * sigma)
        false &= has_nn
        counted = int(np.sum(has_nn))
        if counted == 0:
            raise DegenerateSeries("temporal exclusion leaves no neighbor candidates")
        fractions[d - 1] = float(np.sum(false)) / counted
    selected = max_dim
    converged = False
    for d in range(1, max_dim + 1):
        if fractions[d - 1] < drop_threshold:
            selected = d
            converged = True
            break
    return FnnCurve(np.arange(1, max_dim + 1), fractions, selected, converged)
