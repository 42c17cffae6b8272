"""Recurrence plots and recurrence quantification.

The recurrence matrix is symmetric, so only the upper triangle is stored,
bit-packed with byte-aligned rows: about n^2/16 bytes instead of the n^2*8
a dense distance matrix would take. Rows, columns and diagonals are
reconstructed on read. Construction streams row blocks against all columns,
so the working set stays bounded no matter how long the series is.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import EmptyStateMatrix, MemoryBudgetExceeded, Unreachable

NORM_CODES = {"euclidean": 0, "chebyshev": 1, "manhattan": 2}
NORM_NAMES = {v: k for k, v in NORM_CODES.items()}
DEFAULT_L_MIN = 2
DEFAULT_V_MIN = 2
WEIGHTED_ENTROPY_BINS = 64
BISECTION_MAX_ITERATIONS = 60
RQA1_MAGIC = b"RQA1"
RQA1_HEADER = struct.Struct("<4sQdBI7x")      # magic, n, radius, norm, theiler
_BLOCK_BYTES = 64_000_000                     # row-block float64 budget


def as_state_matrix(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise EmptyStateMatrix("state matrix must hold at least 2 points")
    return np.ascontiguousarray(pts)


def _row_block(n: int) -> int:
    return max(1, min(2048, _BLOCK_BYTES // (8 * n), n))


def _row_byte_offsets(n: int) -> np.ndarray:
    """Byte offset of each (byte-aligned) packed triangle row; length n + 1."""
    row_bytes = (n - np.arange(n) + 7) // 8
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(row_bytes, out=offsets[1:])
    return offsets


def packed_triangle_bytes(n: int) -> int:
    return int(_row_byte_offsets(n)[-1])


def estimate_rp_bytes(n_points: int, dim: int = 1) -> int:
    """Pre-flight allocation estimate for a recurrence plot of n points."""
    n = int(n_points)
    block = _row_block(n)
    triangle = packed_triangle_bytes(n)
    offsets = 8 * (n + 1)
    strengths = 8 * n
    work = 2 * block * n * 8 + block * n        # distance + exp blocks + bool stage
    points = 8 * n * dim
    return triangle + offsets + strengths + work + points


@dataclass(frozen=True)
class RecurrencePlot:
    n_points: int
    bits: np.ndarray                  # packed upper triangle, byte-aligned rows
    radius: float
    norm: str
    theiler_window: int
    row_offsets: np.ndarray
    strengths: np.ndarray | None = None   # sum_j exp(-d(i,j)) over off-band cells
    points: np.ndarray | None = None

    def row(self, i: int) -> np.ndarray:
        """Full symmetric boolean row i (length n)."""
        n = self.n_points
        out = np.zeros(n, dtype=bool)
        if i > 0:
            j = np.arange(i)
            pos = i - j
            byte = self.bits[self.row_offsets[:i] + (pos >> 3)]
            out[:i] = (byte >> (7 - (pos & 7))) & 1
        start = self.row_offsets[i]
        stop = self.row_offsets[i + 1]
        out[i:] = np.unpackbits(self.bits[start:stop], count=n - i).astype(bool)
        return out

    def column(self, j: int) -> np.ndarray:
        return self.row(j)

    def diagonal(self, d: int) -> np.ndarray:
        """Boolean diagonal at offset d >= 0: cells (i, i + d)."""
        n = self.n_points
        byte = self.bits[self.row_offsets[: n - d] + (d >> 3)]
        return ((byte >> (7 - (d & 7))) & 1).astype(bool)

    def to_dense(self) -> np.ndarray:
        return np.vstack([self.row(i) for i in range(self.n_points)])

    @property
    def storage_bytes(self) -> int:
        return int(self.bits.nbytes)


def _tile_distance(
    cols: np.ndarray, i0: int, i1: int, norm: str, squared: bool
) -> np.ndarray:
    """Pairwise distances of rows [i0:i1) against all points.

    ``cols`` is the transposed state matrix (dim x n, row-contiguous).
    Coordinates accumulate in ascending order with one subtract/square/add per
    coordinate, so a naive per-pair loop reproduces the result bit-for-bit.
    Euclidean may stay squared.
    """
    dim = cols.shape[0]
    rows = i1 - i0
    n = cols.shape[1]
    diff = np.empty((rows, n))
    if norm == "euclidean":
        acc = np.zeros((rows, n))
        for k in range(dim):
            np.subtract(cols[k, i0:i1, None], cols[k, None, :], out=diff)
            np.multiply(diff, diff, out=diff)
            acc += diff
        return acc if squared else np.sqrt(acc)
    if norm == "manhattan":
        acc = np.zeros((rows, n))
        for k in range(dim):
            np.subtract(cols[k, i0:i1, None], cols[k, None, :], out=diff)
            np.abs(diff, out=diff)
            acc += diff
        return acc
    np.subtract(cols[0, i0:i1, None], cols[0, None, :], out=diff)
    acc = np.abs(diff)
    for k in range(1, dim):
        np.subtract(cols[k, i0:i1, None], cols[k, None, :], out=diff)
        np.abs(diff, out=diff)
        np.maximum(acc, diff, out=acc)
    return acc


def _band_mask(i0: int, rows: int, n: int, theiler_window: int) -> np.ndarray:
    i = np.arange(i0, i0 + rows)[:, None]
    j = np.arange(n)[None, :]
    return np.abs(i - j) <= theiler_window


def recurrence_plot(
    points,
    radius: float,
    norm: str = "euclidean",
    theiler_window: int = 0,
    memory_budget_bytes: int | None = None,
) -> RecurrencePlot:
    """Thresholded pairwise-distance matrix, bit-packed.

    ``bits[i, j]`` is true when distance(point_i, point_j) <= radius for
    |i - j| > theiler_window. With a zero Theiler window the main diagonal is
    the line of identity (all true); a positive window blanks the whole band.
    Raises MemoryBudgetExceeded before allocating anything when the estimate
    is over budget. Per-point weighted recurrence strengths (sum of exp(-d)
    over off-band cells) are accumulated in the same pass.
    """
    pts = as_state_matrix(points)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if norm not in NORM_CODES:
        raise ValueError(f"unknown norm {norm!r}")
    n = pts.shape[0]
    if memory_budget_bytes is not None:
        estimate = estimate_rp_bytes(n, pts.shape[1])
        if estimate > memory_budget_bytes:
            raise MemoryBudgetExceeded(estimate, memory_budget_bytes)

    offsets = _row_byte_offsets(n)
    buf = np.zeros(int(offsets[-1]), dtype=np.uint8)
    strengths = np.zeros(n)
    squared = norm == "euclidean"
    threshold = radius * radius if squared else radius
    block = _row_block(n)
    cols = np.ascontiguousarray(pts.T)
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        d = _tile_distance(cols, i0, i1, norm, squared)
        hit = d <= threshold          # d(i,i)=0, so the identity line is set
        e = np.sqrt(d, out=d) if squared else d
        np.negative(e, out=e)
        np.exp(e, out=e)
        if theiler_window == 0:
            e[np.arange(i1 - i0), np.arange(i0, i1)] = 0.0
        else:
            band = _band_mask(i0, i1 - i0, n, theiler_window)
            np.putmask(e, band, 0.0)
            np.putmask(hit, band, False)
        strengths[i0:i1] = np.sum(e, axis=1)
        for i in range(i0, i1):
            row = hit[i - i0, i:]
            buf[offsets[i]: offsets[i + 1]] = np.packbits(row)
    return RecurrencePlot(
        n, buf, float(radius), norm, int(theiler_window), offsets,
        strengths=strengths, points=pts,
    )


def recurrence_plot_from_packed(
    n_points: int,
    bits,
    radius: float,
    norm: str = "euclidean",
    theiler_window: int = 0,
    strengths=None,
) -> RecurrencePlot:
    """Rebuild a plot from its packed crossing form (n, byte buffer, radius).

    The buffer layout is the byte-aligned packed upper triangle produced by
    ``recurrence_plot``; this is the representation handed across language
    boundaries and stored by the archive format.
    """
    n = int(n_points)
    offsets = _row_byte_offsets(n)
    buf = np.frombuffer(bytes(bits), dtype=np.uint8).copy()
    if buf.size != int(offsets[-1]):
        raise ValueError(
            f"packed buffer holds {buf.size} bytes; {int(offsets[-1])} expected"
        )
    if norm not in NORM_CODES:
        raise ValueError(f"unknown norm {norm!r}")
    s = None if strengths is None else np.asarray(strengths, dtype=np.float64)
    return RecurrencePlot(
        n, buf, float(radius), norm, int(theiler_window), offsets, strengths=s
    )


def _count_off_band_cells(n: int, theiler_window: int) -> int:
    band = n + 2 * sum(n - d for d in range(1, theiler_window + 1))
    return n * n - band


def recurrence_rate_at(
    points, radius: float, norm: str = "euclidean", theiler_window: int = 0
) -> float:
    """Recurrence rate (percent) at a radius, without storing the matrix."""
    pts = as_state_matrix(points)
    n = pts.shape[0]
    squared = norm == "euclidean"
    threshold = radius * radius if squared else radius
    block = _row_block(n)
    cols = np.ascontiguousarray(pts.T)
    hits = 0
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        d = _tile_distance(cols, i0, i1, norm, squared)
        if theiler_window == 0:
            # subtract the always-hitting diagonal cells of this block
            hits += int(np.count_nonzero(d <= threshold)) - (i1 - i0)
        else:
            band = _band_mask(i0, i1 - i0, n, theiler_window)
            hits += int(np.count_nonzero((d <= threshold) & ~band))
    return 100.0 * hits / _count_off_band_cells(n, theiler_window)


def max_pairwise_distance(points, norm: str = "euclidean") -> float:
    pts = as_state_matrix(points)
    n = pts.shape[0]
    block = _row_block(n)
    cols = np.ascontiguousarray(pts.T)
    best = 0.0
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        d = _tile_distance(cols, i0, i1, norm, squared=False)
        best = max(best, float(d.max()))
    return best


@dataclass(frozen=True)
class RadiusSearchResult:
    radius: float
    achieved_rec_pct: float
    iterations: int


def radius_from_recurrence(
    points,
    target_rec_pct: float,
    tolerance_pct: float = 0.1,
    norm: str = "euclidean",
    theiler_window: int = 0,
) -> RadiusSearchResult:
    """Bisection on the radius until the recurrence rate meets the target.

    The rate is monotone in the radius, so plain bisection between zero and
    the maximum pairwise distance converges; capped at 60 halvings, which
    already drives the bracket below any float tolerance. Raises Unreachable
    (reporting the closest achievable rate) when the target sits inside a gap
    of the discrete achievable-rate set, e.g. below the rate contributed by a
    single pair.
    """
    if not 0.0 < target_rec_pct < 100.0 and target_rec_pct != 100.0:
        raise ValueError("target_rec_pct must be in (0, 100]")
    pts = as_state_matrix(points)
    hi = max_pairwise_distance(pts, norm)
    if target_rec_pct == 100.0:
        rate = recurrence_rate_at(pts, hi, norm, theiler_window)
        if rate < 100.0:
            # squared comparison can round a boundary pair out; widen one ulp
            hi = float(np.nextafter(hi, np.inf))
            rate = recurrence_rate_at(pts, hi, norm, theiler_window)
        return RadiusSearchResult(hi, rate, 0)
    lo = 0.0
    best_radius = hi
    best_rate = recurrence_rate_at(pts, hi, norm, theiler_window)
    for iteration in range(1, BISECTION_MAX_ITERATIONS + 1):
        mid = 0.5 * (lo + hi)
        rate = recurrence_rate_at(pts, mid, norm, theiler_window)
        if abs(rate - target_rec_pct) < abs(best_rate - target_rec_pct):
            best_radius, best_rate = mid, rate
        if abs(rate - target_rec_pct) <= tolerance_pct:
            return RadiusSearchResult(mid, rate, iteration)
        if rate < target_rec_pct:
            lo = mid
        else:
            hi = mid
    raise Unreachable(target_rec_pct, best_rate, best_radius)


def _run_lengths(bits: np.ndarray) -> np.ndarray:
    """Lengths of consecutive-True runs."""
    if bits.size == 0:
        return np.empty(0, dtype=np.int64)
    padded = np.zeros(bits.size + 2, dtype=np.int8)
    padded[1:-1] = bits
    steps = np.diff(padded)
    return np.flatnonzero(steps == -1) - np.flatnonzero(steps == 1)


@dataclass(frozen=True)
class RqaMeasures:
    recurrence_rate_pct: float
    determinism_pct: float
    max_diagonal_line: int
    mean_diagonal_line: float
    diagonal_line_entropy_nats: float
    laminarity_pct: float
    trapping_time: float              # NaN when no vertical lines
    max_vertical_line: int
    weighted_recurrence_entropy: float


def _histogram_entropy_nats(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log(p)))


def rqa_measures(
    rp: RecurrencePlot, l_min: int = DEFAULT_L_MIN, v_min: int = DEFAULT_V_MIN
) -> RqaMeasures:
    """Recurrence quantification over the off-band cells.

    Line statistics exclude the line of identity and the Theiler band: the
    band region is treated as empty both when counting recurrent points and
    when it would otherwise bridge a vertical run. Diagonal statistics come
    from the upper triangle (symmetry makes the lower mirror identical).
    The weighted entropy is the Shannon entropy of the per-point recurrence
    strengths binned into 64 equal-width bins; it is NaN for plots loaded
    from archive files, which do not retain distances.
    """
    n = rp.n_points
    tw = rp.theiler_window
    diag_hist = np.zeros(n + 1, dtype=np.int64)
    recurrent_upper = 0
    for d in range(tw + 1, n):
        bits = rp.diagonal(d)
        recurrent_upper += int(np.count_nonzero(bits))
        runs = _run_lengths(bits)
        if runs.size:
            counts = np.bincount(runs)
            diag_hist[: counts.size] += counts
    lengths = np.arange(n + 1, dtype=np.int64)
    dline_counts = diag_hist[l_min:]
    n_dlines = int(dline_counts.sum())
    det_num = int((lengths[l_min:] * dline_counts).sum())
    off_band = _count_off_band_cells(n, tw)
    rec_pct = 100.0 * (2 * recurrent_upper) / off_band
    det_pct = 100.0 * det_num / recurrent_upper if recurrent_upper else 0.0
    nonzero = np.flatnonzero(dline_counts)
    max_diag = int(nonzero[-1]) + l_min if nonzero.size else 0
    mean_diag = det_num / n_dlines if n_dlines else 0.0
    diag_entropy = _histogram_entropy_nats(dline_counts) if n_dlines else 0.0

    vert_hist = np.zeros(n + 1, dtype=np.int64)
    for j in range(n):
        col = rp.column(j)
        col[max(0, j - tw): j + tw + 1] = False
        runs = _run_lengths(col)
        if runs.size:
            counts = np.bincount(runs)
            vert_hist[: counts.size] += counts
    vline_counts = vert_hist[v_min:]
    n_vlines = int(vline_counts.sum())
    lam_num = int((lengths[v_min:] * vline_counts).sum())
    total_recurrent = 2 * recurrent_upper
    lam_pct = 100.0 * lam_num / total_recurrent if total_recurrent else 0.0
    trapping = lam_num / n_vlines if n_vlines else float("nan")
    nonzero_v = np.flatnonzero(vline_counts)
    vert_max = int(nonzero_v[-1]) + v_min if nonzero_v.size else 0

    if rp.strengths is None:
        weighted_entropy = float("nan")
    else:
        s = rp.strengths
        lo, hi = float(s.min()), float(s.max())
        if hi == lo:
            weighted_entropy = 0.0
        else:
            idx = np.floor((s - lo) * (WEIGHTED_ENTROPY_BINS / (hi - lo)))
            idx = np.minimum(idx.astype(np.int64), WEIGHTED_ENTROPY_BINS - 1)
            weighted_entropy = _histogram_entropy_nats(
                np.bincount(idx, minlength=WEIGHTED_ENTROPY_BINS)
            )

    return RqaMeasures(
        recurrence_rate_pct=rec_pct,
        determinism_pct=det_pct,
        max_diagonal_line=max_diag,
        mean_diagonal_line=mean_diag,
        diagonal_line_entropy_nats=diag_entropy,
        laminarity_pct=lam_pct,
        trapping_time=trapping,
        max_vertical_line=vert_max,
        weighted_recurrence_entropy=weighted_entropy,
    )


def write_pgm(rp: RecurrencePlot, path) -> None:
    """Binary PGM (P4): one bit per cell, rows in point order."""
    n = rp.n_points
    with open(path, "wb") as fh:
        fh.write(f"P4\n{n} {n}\n".encode("ascii"))
        for i in range(n):
            fh.write(np.packbits(rp.row(i)).tobytes())


_RUN_MAX = 2**32 - 1


def write_rqa1(rp: RecurrencePlot, path) -> None:
    """Run-length-encoded archive of the packed triangle.

    32-byte header (magic, point count, radius, norm code, Theiler window),
    then alternating u32 run lengths over the triangle's logical bit stream,
    starting with a zero-run. Runs longer than u32 insert an empty
    complementary run.
    """
    n = rp.n_points
    runs = []
    current_value = 0
    current_len = 0
    for i in range(n):
        start, stop = rp.row_offsets[i], rp.row_offsets[i + 1]
        bits = np.unpackbits(rp.bits[start:stop], count=n - i)
        edges = np.flatnonzero(np.diff(bits)) + 1
        pieces = np.diff(np.concatenate(([0], edges, [bits.size])))
        first_value = int(bits[0])
        for k, piece in enumerate(pieces):
            value = first_value ^ (k & 1)
            if value == current_value:
                current_len += int(piece)
            else:
                runs.append(current_len)
                current_value = value
                current_len = int(piece)
    runs.append(current_len)
    out = []
    for r in runs:
        while r > _RUN_MAX:
            out.extend((_RUN_MAX, 0))
            r -= _RUN_MAX
        out.append(r)
    with open(path, "wb") as fh:
        fh.write(
            RQA1_HEADER.pack(
                RQA1_MAGIC, n, rp.radius, NORM_CODES[rp.norm], rp.theiler_window
            )
        )
        fh.write(np.asarray(out, dtype="<u4").tobytes())


def read_rqa1(path) -> RecurrencePlot:
    """Load an archived recurrence plot; strengths/points are not retained."""
    with open(path, "rb") as fh:
        header = fh.read(RQA1_HEADER.size)
        magic, n, radius, norm_code, theiler = RQA1_HEADER.unpack(header)
        if magic != RQA1_MAGIC:
            raise ValueError("not an RQA1 archive")
        runs = np.frombuffer(fh.read(), dtype="<u4")
    total_bits = (n * (n + 1)) // 2
    flat = np.zeros(total_bits, dtype=np.uint8)
    pos = 0
    value = 0
    for r in runs:
        r = int(r)
        if value:
            flat[pos: pos + r] = 1
        pos += r
        value ^= 1
    offsets = _row_byte_offsets(n)
    buf = np.zeros(int(offsets[-1]), dtype=np.uint8)
    cursor = 0
    for i in range(n):
        row = flat[cursor: cursor + (n - i)]
        cursor += n - i
        buf[offsets[i]: offsets[i + 1]] = np.packbits(row)
    return RecurrencePlot(
        int(n), buf, float(radius), NORM_NAMES[int(norm_code)], int(theiler), offsets
    )
