"""Detrended fluctuation analysis: scaling exponent and fluctuation curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import series_values
from .errors import DegenerateFit, SeriesTooShort

DEFAULT_DETREND_ORDER = 1
AUTO_BOX_COUNT = 16
AUTO_BOX_MIN = 8
AUTO_BOX_DIVISOR = 9
# F(n) below this fraction of the profile RMS is a degenerate (exact) fit.
ZERO_FLUCTUATION_REL = 1e-8


@dataclass(frozen=True)
class DfaResult:
    alpha: float
    box_sizes: np.ndarray
    fluctuations: np.ndarray
    fit_range: tuple[int, int]
    fit_r2: float


def auto_box_sizes(n: int) -> np.ndarray:
    """Log-spaced box sizes from 8 up to n // 9, deduplicated."""
    top = n // AUTO_BOX_DIVISOR
    if top < AUTO_BOX_MIN:
        raise SeriesTooShort(
            f"need at least {AUTO_BOX_MIN * AUTO_BOX_DIVISOR} samples for "
            f"automatic box sizes, got {n}"
        )
    sizes = np.geomspace(AUTO_BOX_MIN, top, AUTO_BOX_COUNT)
    return np.unique(np.round(sizes).astype(np.int64))


def _box_rss(profile: np.ndarray, box: int, order: int) -> tuple[float, int]:
    """Residual sum of squares over non-overlapping boxes, one direction."""
    k = profile.size // box
    segs = profile[: k * box].reshape(k, box)
    t = np.arange(box, dtype=np.float64)
    v = np.vander(t, order + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(v, segs.T, rcond=None)
    resid = v @ coef - segs.T
    return float(np.sum(resid * resid)), k * box


def fluctuation_curve(
    x, box_sizes=None, detrend_order: int = DEFAULT_DETREND_ORDER
) -> tuple[np.ndarray, np.ndarray]:
    """F(n) per box size: integrate, box both directions, detrend, RMS.

    The mean-removed series is integrated; the profile is boxed forward and
    backward (reversed profile) so trailing samples contribute; each box is
    detrended by a least-squares polynomial of ``detrend_order``; F(n) is the
    RMS residual over all boxes. Returns (box_sizes, fluctuations).
    """
    xv = series_values(x)
    if detrend_order < 1:
        raise ValueError("detrend_order must be >= 1")
    boxes = auto_box_sizes(xv.size) if box_sizes is None else np.unique(
        np.asarray(box_sizes, dtype=np.int64)
    )
    if boxes.size == 0 or boxes[0] < detrend_order + 2:
        raise ValueError("box sizes must allow a non-trivial polynomial fit")
    if xv.size < 4 * int(boxes[-1]):
        raise SeriesTooShort(
            f"need at least 4*max(box_sizes) = {4 * int(boxes[-1])} samples, "
            f"got {xv.size}"
        )
    profile = np.cumsum(xv - np.mean(xv))
    reverse = profile[::-1]
    fluct = np.empty(boxes.size)
    for b, box in enumerate(boxes):
        rss_f, n_f = _box_rss(profile, int(box), detrend_order)
        rss_b, n_b = _box_rss(reverse, int(box), detrend_order)
        fluct[b] = np.sqrt((rss_f + rss_b) / (n_f + n_b))
    return boxes, fluct


def dfa(
    x,
    box_sizes=None,
    detrend_order: int = DEFAULT_DETREND_ORDER,
    fit_range: tuple[int, int] | None = None,
) -> DfaResult:
    """DFA scaling exponent from the log-log fluctuation fit.

    ``alpha`` is the slope of ln F(n) against ln n over ``fit_range``
    (inclusive; defaults to the full box range); at least three fitted box
    sizes are required and exactly-detrended profiles (F ~ 0) are reported as
    DegenerateFit rather than fitted.
    """
    xv = series_values(x)
    boxes, fluct = fluctuation_curve(xv, box_sizes, detrend_order)
    profile = np.cumsum(xv - np.mean(xv))

    lo, hi = fit_range if fit_range is not None else (int(boxes[0]), int(boxes[-1]))
    in_fit = (boxes >= lo) & (boxes <= hi)
    if int(np.sum(in_fit)) < 3:
        raise DegenerateFit(
            f"fit range [{lo}, {hi}] covers {int(np.sum(in_fit))} box sizes; need >= 3"
        )
    floor = ZERO_FLUCTUATION_REL * float(np.sqrt(np.mean(profile * profile)))
    if np.any(fluct[in_fit] <= floor):
        raise DegenerateFit(
            "zero fluctuation after detrending (polynomial fits the profile exactly)"
        )
    ln_n = np.log(boxes[in_fit].astype(np.float64))
    ln_f = np.log(fluct[in_fit])
    slope, intercept = np.polyfit(ln_n, ln_f, 1)
    pred = slope * ln_n + intercept
    ss_res = float(np.sum((ln_f - pred) ** 2))
    ss_tot = float(np.sum((ln_f - np.mean(ln_f)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DfaResult(float(slope), boxes, fluct, (lo, hi), float(r2))
