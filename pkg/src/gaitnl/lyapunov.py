"""Largest Lyapunov exponent estimators.

Two routes: the divergence-curve method (track log distance between each
point and its nearest temporally-separated neighbor, fit slopes over pinned
step windows) and the trajectory-evolution method (follow one fiducial
trajectory, renormalizing against a fresh neighbor whenever the separation
outgrows the measurement scale, accumulating log stretch).

Exponents are per sample by default and per second when the input carries a
sample rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .data import TimeSeries, series_values
from .errors import DegenerateSeries, NoReplacementFound, NoValidNeighbors, SeriesTooShort
from .statespace import EmbeddingParams, embed

AUTO = "auto"
DEFAULT_MAX_STEPS = 100
DEFAULT_EVOLVE_STEPS = 3
SCALE_MAX_FRACTION = 0.10           # of attractor extent
SCALE_MIN_FRACTION = 0.01           # noise-floor estimate
ORIENTATION_PASSES_RAD = (0.3, 0.9, math.pi)   # widening replacement search
MIN_TAIL = 100                      # required points beyond the tracked window


@dataclass(frozen=True)
class LyeRosensteinResult:
    steps: np.ndarray
    divergence_curve: np.ndarray      # mean log distance per step
    short_exp: float
    local_exp: float
    long_exp: float
    orbital_exp: float
    fit_windows: dict                 # name -> (start_step, end_step)
    mean_period: float
    n_reference: int
    units: str                        # "per_sample" | "per_second"


@dataclass(frozen=True)
class LyeWolfResult:
    largest_exponent: float
    replacements: int
    evolution_steps: int              # total evolved steps
    units: str


def mean_period(x) -> float:
    """Reciprocal of the mean frequency of the magnitude spectrum, in samples."""
    xv = series_values(x)
    spectrum = np.abs(np.fft.rfft(xv - np.mean(xv)))
    freqs = np.fft.rfftfreq(xv.size)
    weight = spectrum[1:].sum()
    if weight == 0.0:
        raise DegenerateSeries("flat spectrum: cannot estimate a mean period")
    mean_freq = float((freqs[1:] * spectrum[1:]).sum() / weight)
    return 1.0 / mean_freq


def _rate_hz(x) -> float | None:
    return x.sample_rate_hz if isinstance(x, TimeSeries) else None


def _slope(steps: np.ndarray, curve: np.ndarray, lo: int, hi: int) -> float:
    lo = max(0, lo)
    hi = min(curve.size - 1, hi)
    mask = (steps >= lo) & (steps <= hi) & np.isfinite(curve)
    if int(mask.sum()) < 2:
        return math.nan
    coef = np.polyfit(steps[mask].astype(np.float64), curve[mask], 1)
    return float(coef[0])


def _steepest_window(steps: np.ndarray, curve: np.ndarray) -> tuple[float, int, int]:
    wlen = max(2, curve.size // 4)
    best = (-math.inf, 0, wlen - 1)
    for start in range(0, curve.size - wlen + 1):
        s = _slope(steps, curve, start, start + wlen - 1)
        if not math.isnan(s) and s > best[0]:
            best = (s, start, start + wlen - 1)
    if best[0] == -math.inf:
        return math.nan, 0, wlen - 1
    return best


def lye_rosenstein(
    x,
    params: EmbeddingParams,
    mean_period_samples=AUTO,
    max_steps=AUTO,
) -> LyeRosensteinResult:
    """Divergence-curve largest-exponent estimate.

    Every reference point is paired with its nearest neighbor more than one
    mean period away in time; the curve is the mean log separation per
    forward step over all pairs still inside the data. Reference points are
    restricted so each contributes the full ``max_steps`` track, keeping the
    per-step average over a fixed population. ``max_steps`` defaults to three
    mean periods, clipped to the data. Slopes over pinned step windows:

    - short:   1 .. 2 mean periods (the exponential-growth regime; the first
               mean period is a neighbor-realignment knee and is skipped)
    - local:   steepest contiguous quarter of the curve
    - long:    1 .. 4 mean periods
    - orbital: 4 .. 10 mean periods (windows clipped to the curve)
    """
    xv = series_values(x)
    points = embed(xv, params)
    m = points.shape[0]
    mp = mean_period(xv) if mean_period_samples == AUTO else float(mean_period_samples)
    if max_steps == AUTO:
        cap = xv.size - (params.dim - 1) * params.tau - MIN_TAIL
        max_steps = min(int(round(3 * mp)), cap)
        if max_steps < 2:
            raise SeriesTooShort(
                f"series of {xv.size} leaves no room for a divergence track"
            )
    max_steps = int(max_steps)
    if xv.size - (params.dim - 1) * params.tau - max_steps < MIN_TAIL:
        raise SeriesTooShort(
            f"need at least {MIN_TAIL} tracked points after embedding and "
            f"{max_steps} steps; series of {xv.size} is too short"
        )
    exclude = max(1, int(math.ceil(mp)))
    usable = m - max_steps
    base = points[:usable]
    tree = cKDTree(base)
    k = min(usable, 2 * exclude + 2)
    dists, idxs = tree.query(base, k=k)
    if k == 1:
        dists, idxs = dists[:, None], idxs[:, None]
    own = np.arange(usable)[:, None]
    valid = np.abs(idxs - own) > exclude
    first = np.argmax(valid, axis=1)
    found = valid[np.arange(usable), first]
    refs = np.flatnonzero(found)
    if refs.size == 0:
        raise NoValidNeighbors(
            f"temporal exclusion of {exclude} samples leaves no neighbor candidates"
        )
    nbrs = idxs[refs, first[refs]]

    steps = np.arange(max_steps + 1)
    curve = np.empty(max_steps + 1)
    for s in range(max_steps + 1):
        diff = points[refs + s] - points[nbrs + s]
        d = np.sqrt(np.sum(diff * diff, axis=1))
        positive = d > 0
        if not np.any(positive):
            curve[s] = math.nan
            continue
        curve[s] = float(np.sum(np.log(d[positive])) / int(positive.sum()))

    mp_i = max(1, int(round(mp)))
    windows = {
        "short": (mp_i, 2 * mp_i),
        "long": (mp_i, 4 * mp_i),
        "orbital": (4 * mp_i, 10 * mp_i),
    }
    short = _slope(steps, curve, *windows["short"])
    long_ = _slope(steps, curve, *windows["long"])
    orbital = _slope(steps, curve, *windows["orbital"])
    local, lo, hi = _steepest_window(steps, curve)
    windows["local"] = (lo, hi)
    windows = {
        name: (w[0], min(w[1], max_steps)) for name, w in windows.items()
    }

    rate = _rate_hz(x)
    if rate is not None:
        scale, units = rate, "per_second"
    else:
        scale, units = 1.0, "per_sample"
    return LyeRosensteinResult(
        steps=steps,
        divergence_curve=curve,
        short_exp=short * scale,
        local_exp=local * scale,
        long_exp=long_ * scale,
        orbital_exp=orbital * scale,
        fit_windows=windows,
        mean_period=mp,
        n_reference=int(refs.size),
        units=units,
    )


def _extent(points: np.ndarray) -> float:
    span = points.max(axis=0) - points.min(axis=0)
    return float(np.sqrt(np.sum(span * span)))


def lye_wolf(
    x,
    params: EmbeddingParams,
    evolve_steps: int = DEFAULT_EVOLVE_STEPS,
    scale_min=AUTO,
    scale_max=AUTO,
) -> LyeWolfResult:
    """Trajectory-evolution largest-exponent estimate.

    The fiducial trajectory advances ``evolve_steps`` at a time. When the
    separation from the companion exceeds ``scale_max`` (or hits zero), a
    replacement is searched inside [scale_min, scale_max] minimizing the
    orientation change, with the angular constraint widened over three
    passes; when even the widest pass finds nothing the current companion is
    kept. Neighbor candidates are kept at least one mean period away in time.
    The exponent is the accumulated log stretch over the evolved time.
    """
    xv = series_values(x)
    points = embed(xv, params)
    m = points.shape[0]
    if evolve_steps < 1:
        raise ValueError("evolve_steps must be >= 1")
    if m - evolve_steps < MIN_TAIL:
        raise SeriesTooShort(
            f"need at least {MIN_TAIL + evolve_steps} embedded points, got {m}"
        )
    extent = _extent(points)
    if extent == 0.0:
        raise DegenerateSeries("all embedded points identical")
    s_max = SCALE_MAX_FRACTION * extent if scale_max == AUTO else float(scale_max)
    s_min = SCALE_MIN_FRACTION * extent if scale_min == AUTO else float(scale_min)
    exclude = max(1, int(math.ceil(mean_period(xv))))
    tree = cKDTree(points)

    def initial_neighbor(i: int) -> int:
        k = min(m, 2 * exclude + 8)
        dists, idxs = tree.query(points[i], k=k)
        order = np.atleast_1d(idxs)
        dist = np.atleast_1d(dists)
        for j, d in zip(order, dist):
            if abs(int(j) - i) > exclude and d >= s_min:
                return int(j)
        for j, d in zip(order, dist):
            if abs(int(j) - i) > exclude and d > 0:
                return int(j)
        raise NoReplacementFound("no usable starting neighbor")

    def replacement(i: int, u_old: np.ndarray) -> int | None:
        candidates = tree.query_ball_point(points[i], s_max)
        best = None
        norm_old = float(np.sqrt(np.sum(u_old * u_old)))
        for max_angle in ORIENTATION_PASSES_RAD:
            for j in sorted(candidates):
                if abs(j - i) <= exclude or j + evolve_steps >= m:
                    continue
                u = points[j] - points[i]
                d = float(np.sqrt(np.sum(u * u)))
                if d < s_min or d > s_max:
                    continue
                if norm_old > 0 and d > 0:
                    cosine = float(np.dot(u, u_old) / (d * norm_old))
                    angle = math.acos(min(1.0, max(-1.0, cosine)))
                else:
                    angle = 0.0
                if angle > max_angle:
                    continue
                if best is None or angle < best[0]:
                    best = (angle, j)
            if best is not None:
                return best[1]
        return None

    i = 0
    j = initial_neighbor(0)
    log_sum = 0.0
    total_steps = 0
    replacements = 0
    while i + evolve_steps < m and j + evolve_steps < m:
        d_before = float(np.sqrt(np.sum((points[i] - points[j]) ** 2)))
        i2 = i + evolve_steps
        j2 = j + evolve_steps
        d_after = float(np.sqrt(np.sum((points[i2] - points[j2]) ** 2)))
        if d_before > 0 and d_after > 0:
            log_sum += math.log(d_after / d_before)
            total_steps += evolve_steps
        i = i2
        j = j2
        if d_after > s_max or d_after == 0.0:
            u_old = points[j] - points[i]
            cand = replacement(i, u_old)
            if cand is not None:
                j = cand
                replacements += 1
            elif d_after == 0.0:
                raise NoReplacementFound(
                    "separation collapsed to zero and no replacement exists"
                )
    if total_steps == 0:
        raise NoValidNeighbors("no usable evolution segments")

    rate = _rate_hz(x)
    per_sample = log_sum / total_steps
    if rate is not None:
        return LyeWolfResult(per_sample * rate, replacements, total_steps, "per_second")
    return LyeWolfResult(per_sample, replacements, total_steps, "per_sample")
