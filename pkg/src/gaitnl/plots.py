"""Deterministic SVG line charts and paired CSV exports.

Everything here is byte-reproducible: fixed canvas, fixed palette, no
timestamps, floats serialized with shortest round-trip repr in CSVs and
fixed %.6g placement in SVG geometry.
"""

from __future__ import annotations

import csv
import math

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 32, 48
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
N_TICKS = 5


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _finite(values) -> list[float]:
    return [float(v) for v in values if math.isfinite(float(v))]


def _axis_range(values: list[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 1.0
    lo, hi = min(values), max(values)
    if lo == hi:
        pad = 1.0 if lo == 0 else abs(lo) * 0.1
        return lo - pad, hi + pad
    return lo, hi


def write_csv_points(path, header: list[str], columns: list) -> None:
    """CSV of plotted points; floats keep full round-trip precision."""
    rows = zip(*columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([
                repr(float(v)) if isinstance(v, float) or hasattr(v, "dtype")
                else str(v)
                for v in row
            ])


def svg_line_chart(
    path,
    series: list[tuple[str, list, list]],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    log_x: bool = False,
    log_y: bool = False,
) -> None:
    """Write a fixed-size SVG line chart; NaN points split the polyline."""

    def tx(v: float) -> float:
        return math.log(v) if log_x else v

    def ty(v: float) -> float:
        return math.log(v) if log_y else v

    xs_all, ys_all = [], []
    for _, xs, ys in series:
        for xv, yv in zip(xs, ys):
            xv, yv = float(xv), float(yv)
            if not (math.isfinite(xv) and math.isfinite(yv)):
                continue
            if (log_x and xv <= 0) or (log_y and yv <= 0):
                continue
            xs_all.append(tx(xv))
            ys_all.append(ty(yv))
    x_lo, x_hi = _axis_range(xs_all)
    y_lo, y_hi = _axis_range(ys_all)
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(v: float) -> float:
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v: float) -> float:
        return MARGIN_T + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#cccccc"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    for t in range(N_TICKS):
        frac = t / (N_TICKS - 1)
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        gx = MARGIN_L + frac * plot_w
        gy = MARGIN_T + plot_h - frac * plot_h
        x_text = _fmt(math.exp(xv)) if log_x else _fmt(xv)
        y_text = _fmt(math.exp(yv)) if log_y else _fmt(yv)
        parts.append(
            f'<line x1="{_fmt(gx)}" y1="{MARGIN_T}" x2="{_fmt(gx)}" '
            f'y2="{MARGIN_T + plot_h}" stroke="#eeeeee"/>'
        )
        parts.append(
            f'<line x1="{MARGIN_L}" y1="{_fmt(gy)}" x2="{MARGIN_L + plot_w}" '
            f'y2="{_fmt(gy)}" stroke="#eeeeee"/>'
        )
        parts.append(
            f'<text x="{_fmt(gx)}" y="{MARGIN_T + plot_h + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{x_text}</text>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 6}" y="{_fmt(gy + 3)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{y_text}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{MARGIN_L + plot_w // 2}" y="{HEIGHT - 12}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f"{x_label}</text>"
        )
    if y_label:
        parts.append(
            f'<text x="16" y="{MARGIN_T + plot_h // 2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 16 {MARGIN_T + plot_h // 2})">{y_label}</text>'
        )
    for idx, (label, xs, ys) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        segments: list[list[str]] = [[]]
        for xv, yv in zip(xs, ys):
            xv, yv = float(xv), float(yv)
            bad = not (math.isfinite(xv) and math.isfinite(yv))
            bad = bad or (log_x and xv <= 0) or (log_y and yv <= 0)
            if bad:
                if segments[-1]:
                    segments.append([])
                continue
            segments[-1].append(f"{_fmt(px(tx(xv)))},{_fmt(py(ty(yv)))}")
        for seg in segments:
            if len(seg) >= 2:
                parts.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.5"/>'
                )
            elif len(seg) == 1:
                cx, cy = seg[0].split(",")
                parts.append(f'<circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>')
        if label:
            ly = MARGIN_T + 14 + 14 * idx
            parts.append(
                f'<line x1="{MARGIN_L + 8}" y1="{ly - 4}" x2="{MARGIN_L + 28}" '
                f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
            )
            parts.append(
                f'<text x="{MARGIN_L + 32}" y="{ly}" font-family="sans-serif" '
                f'font-size="11">{label}</text>'
            )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
