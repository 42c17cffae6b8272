"""Regularity and complexity estimators.

Template-matching estimators use the Chebyshev metric with the tolerance
expressed as a fraction of the analyzed series' standard deviation; undefined
results (no matches) are reported as NaN rather than raised. All match counts
are exact integers, so results are bitwise reproducible under any internal
parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.spatial import cKDTree

from .data import series_values
from .errors import InvalidOrder, LengthMismatch, SeriesTooShort

DEFAULT_M = 2
DEFAULT_R = 0.2
ZERO_VARIANCE_TOLERANCE = 1e-12   # absolute floor so constant series match
MULTISCALE_VARIANTS = ("MSE", "CMSE", "RCMSE", "MSFE", "GMSE")

AUTO_MEDIAN = "median"


@dataclass(frozen=True)
class PermutationEntropyResult:
    raw_nats: float
    normalized: float


@dataclass(frozen=True)
class MultiscaleCurve:
    variant: str
    scales: np.ndarray
    values: np.ndarray         # NaN marks scales where the estimator is undefined


def tolerance_from_std(values: np.ndarray, r: float) -> float:
    """Absolute Chebyshev tolerance r*std, floored for zero-variance series."""
    sd = float(np.std(values))
    return r * sd if sd > 0.0 else ZERO_VARIANCE_TOLERANCE


def _templates(values: np.ndarray, length: int, count: int) -> np.ndarray:
    return sliding_window_view(values, length)[:count]


def _match_pairs(values: np.ndarray, m: int, tol: float) -> tuple[int, int]:
    """Template match-pair counts (B at length m, A at length m+1).

    Both counts run over the first len-m templates so every template has an
    (m+1)-sample extension; self-matches excluded; pairs counted once.
    """
    n_t = values.size - m
    t_m = _templates(values, m, n_t)
    t_m1 = _templates(values, m + 1, n_t)
    tree_m = cKDTree(t_m)
    tree_m1 = cKDTree(t_m1)
    b = (int(tree_m.count_neighbors(tree_m, tol, p=np.inf)) - n_t) // 2
    a = (int(tree_m1.count_neighbors(tree_m1, tol, p=np.inf)) - n_t) // 2
    return a, b


def _sampen_abs(values: np.ndarray, m: int, tol: float) -> float:
    if values.size < m + 2:
        raise SeriesTooShort(f"need at least {m + 2} samples, got {values.size}")
    a, b = _match_pairs(values, m, tol)
    if a == 0 or b == 0:
        return math.nan
    return 0.0 if a == b else -math.log(a / b)


def sample_entropy(x, m: int = DEFAULT_M, r: float = DEFAULT_R) -> float:
    """-ln(A/B) over m- and (m+1)-length template matches, self-matches excluded.

    Returns NaN when no template pair matches at either length.
    """
    xv = series_values(x)
    return _sampen_abs(xv, m, tolerance_from_std(xv, r))


def _zscore(values: np.ndarray) -> np.ndarray:
    sd = np.std(values)
    if sd == 0.0:
        return values - np.mean(values)
    return (values - np.mean(values)) / sd


def cross_approximate_entropy(x, y, m: int = DEFAULT_M, r: float = DEFAULT_R) -> float:
    """Asynchrony of x-templates against y-templates (phi_m - phi_{m+1}).

    Both series are z-scored independently and the tolerance applies in
    z-units; matches include j = i, so the self-cross reduces exactly to the
    approximate entropy of x. Returns NaN when some template has no match at
    all (log of a zero frequency).
    """
    xv = series_values(x)
    yv = series_values(y)
    if xv.size != yv.size:
        raise LengthMismatch(f"length {xv.size} vs {yv.size}")
    if xv.size < m + 2:
        raise SeriesTooShort(f"need at least {m + 2} samples, got {xv.size}")
    xz = _zscore(xv)
    yz = _zscore(yv)
    tol = max(r, ZERO_VARIANCE_TOLERANCE)

    def phi(length: int) -> float:
        n_t = xv.size - length + 1
        tx = _templates(xz, length, n_t)
        ty = _templates(yz, length, n_t)
        counts = cKDTree(ty).query_ball_point(tx, tol, p=np.inf, return_length=True)
        if np.any(counts == 0):
            return math.nan
        return float(np.mean(np.log(counts / n_t)))

    return phi(m) - phi(m + 1)


def approximate_entropy(x, m: int = DEFAULT_M, r: float = DEFAULT_R) -> float:
    """Regularity statistic phi_m - phi_{m+1} with self-matches included."""
    return cross_approximate_entropy(x, x, m, r)


def permutation_entropy(x, m: int = 3, tau: int = 1) -> PermutationEntropyResult:
    """Shannon entropy (nats) of ordinal patterns of length m at lag tau.

    Ties rank by earlier index (stable sort). Normalization divides by
    ln(m!). Order m is limited to 2..7.
    """
    if not 2 <= m <= 7:
        raise InvalidOrder(f"order m must be in 2..7, got {m}")
    xv = series_values(x)
    span = (m - 1) * tau
    if xv.size < span + 2:
        raise SeriesTooShort(f"need at least {span + 2} samples, got {xv.size}")
    windows = sliding_window_view(xv, span + 1)[:, ::tau]
    patterns = np.argsort(windows, axis=1, kind="stable")
    codes = patterns @ (m ** np.arange(m, dtype=np.int64))
    _, counts = np.unique(codes, return_counts=True)
    p = counts / counts.sum()
    raw = float(-np.sum(p * np.log(p))) + 0.0
    return PermutationEntropyResult(raw, raw / math.log(math.factorial(m)))


def symbolic_entropy(
    x, threshold=AUTO_MEDIAN, word_length: int = 3
) -> float:
    """Normalized corrected Shannon entropy of thresholded binary words.

    Samples strictly above the threshold (series median by default) map to 1.
    Overlapping ``word_length``-bit words are counted; the plug-in entropy is
    bias-corrected by (observed_words - 1)/(2 * word_count) and normalized by
    the ``word_length``-bit maximum, clipped into [0, 1].
    """
    xv = series_values(x)
    if xv.size < word_length + 1:
        raise SeriesTooShort(f"need at least {word_length + 1} samples, got {xv.size}")
    thr = float(np.median(xv)) if threshold == AUTO_MEDIAN else float(threshold)
    bits = (xv > thr).astype(np.int64)
    weights = 1 << np.arange(word_length - 1, -1, -1, dtype=np.int64)
    words = sliding_window_view(bits, word_length) @ weights
    _, counts = np.unique(words, return_counts=True)
    w_total = int(words.size)
    p = counts / w_total
    h = float(-np.sum(p * np.log(p)))
    corrected = h + (counts.size - 1) / (2.0 * w_total)
    return min(1.0, max(0.0, corrected / (word_length * math.log(2.0))))


def coarse_grain(x, scale: int, offset: int = 0) -> np.ndarray:
    """Mean over non-overlapping windows of ``scale`` starting at ``offset``."""
    xv = series_values(x)
    if scale < 1 or offset < 0:
        raise ValueError("scale must be >= 1 and offset >= 0")
    n = (xv.size - offset) // scale
    if n < 1:
        return xv[:0]
    trimmed = xv[offset: offset + n * scale].reshape(n, scale)
    return trimmed.mean(axis=1)


def _coarse_grain_variance(xv: np.ndarray, scale: int) -> np.ndarray:
    n = xv.size // scale
    windows = xv[: n * scale].reshape(n, scale)
    return windows.var(axis=1)


def _fuzzy_weight_sums(values: np.ndarray, m: int, tol: float) -> tuple[float, float]:
    """Summed exponential memberships exp(-(d/tol)^2) over template pairs.

    Templates have their own mean removed before the Chebyshev distance.
    Row-blocked so long series stay within a fixed working-set size.
    """
    n_t = values.size - m

    def pair_sum(length: int) -> float:
        t = _templates(values, length, n_t)
        t = t - t.mean(axis=1, keepdims=True)
        block = 1024
        total = 0.0
        for start in range(0, n_t, block):
            end = min(start + block, n_t)
            d = np.abs(t[start:end, None, :] - t[None, start:, :]).max(axis=2)
            w = np.exp(-((d / tol) ** 2))
            gi = np.arange(start, end)[:, None]
            gj = np.arange(start, n_t)[None, :]
            total += float(np.sum(np.where(gi < gj, w, 0.0)))
        return total

    b = pair_sum(m)
    a = pair_sum(m + 1)
    return a, b


def _fuzzy_abs(values: np.ndarray, m: int, tol: float) -> float:
    if values.size < m + 2:
        raise SeriesTooShort(f"need at least {m + 2} samples, got {values.size}")
    a, b = _fuzzy_weight_sums(values, m, tol)
    if a == 0.0 or b == 0.0:
        return math.nan
    return 0.0 if a == b else -math.log(a / b)


def multiscale_entropy_plus(
    x,
    m: int = DEFAULT_M,
    r: float = DEFAULT_R,
    max_scale: int = 20,
    variants=MULTISCALE_VARIANTS,
) -> list[MultiscaleCurve]:
    """Multiscale entropy family over scales 1..max_scale.

    MSE applies sample entropy to the mean-coarse-grained series; CMSE
    averages it over all coarse-graining offsets; RCMSE pools the match
    counts over offsets before the log; MSFE swaps the hard match for an
    exponential fuzzy membership; GMSE coarse-grains by windowed variance
    (its scale-1 series is identically zero, giving a forced 0). The
    tolerance is fixed from the original series' standard deviation for
    every scale, except GMSE: the windowed-variance series scales
    quadratically under affine maps of the input, so its tolerance comes
    from the variance series itself at each scale. Offsets whose coarse
    series fall below m+2 samples are skipped; a scale with no usable
    estimate is NaN.
    """
    xv = series_values(x)
    if max_scale < 1 or max_scale > xv.size / 10:
        raise SeriesTooShort(f"max_scale must be in 1..len/10, got {max_scale}")
    if xv.size < max_scale * (m + 2):
        raise SeriesTooShort(
            f"need at least max_scale*(m+2) = {max_scale * (m + 2)} samples, "
            f"got {xv.size}"
        )
    unknown = set(variants) - set(MULTISCALE_VARIANTS)
    if unknown:
        raise ValueError(f"unknown multiscale variants: {sorted(unknown)}")
    tol = tolerance_from_std(xv, r)
    scales = np.arange(1, max_scale + 1)
    out = {v: np.full(max_scale, math.nan) for v in MULTISCALE_VARIANTS if v in variants}

    for s in range(1, max_scale + 1):
        if "MSE" in out:
            cg = coarse_grain(xv, s)
            if cg.size >= m + 2:
                out["MSE"][s - 1] = _sampen_abs(cg, m, tol)
        if "CMSE" in out or "RCMSE" in out:
            values, a_total, b_total = [], 0, 0
            for k in range(s):
                cg = coarse_grain(xv, s, offset=k)
                if cg.size < m + 2:
                    continue
                a, b = _match_pairs(cg, m, tol)
                a_total += a
                b_total += b
                values.append(-math.log(a / b) if a > 0 and b > 0 else math.nan)
            if "CMSE" in out and values:
                out["CMSE"][s - 1] = float(np.mean(values)) + 0.0
            if "RCMSE" in out and a_total > 0 and b_total > 0:
                out["RCMSE"][s - 1] = (
                    0.0 if a_total == b_total else -math.log(a_total / b_total)
                )
        if "MSFE" in out:
            cg = coarse_grain(xv, s)
            if cg.size >= m + 2:
                out["MSFE"][s - 1] = _fuzzy_abs(cg, m, tol)
        if "GMSE" in out:
            cg = _coarse_grain_variance(xv, s)
            if cg.size >= m + 2:
                out["GMSE"][s - 1] = _sampen_abs(cg, m, tolerance_from_std(cg, r))

    return [
        MultiscaleCurve(v, scales.copy(), out[v])
        for v in MULTISCALE_VARIANTS
        if v in out
    ]
