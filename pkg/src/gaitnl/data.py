"""Data model and ingestion: columnar tables of uniformly sampled series.

CSV (comma-delimited, header row, '.' decimal point) and Parquet inputs are
supported. Format is detected by extension with a content-sniffing fallback
(Parquet magic bytes ``PAR1``). Ragged CSV rows are rejected: a kinematics
export with inconsistent row widths is treated as corrupt.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateAttribute,
    EmptyAttributeList,
    EmptyDataset,
    MissingColumn,
    NonNumericColumn,
    UnknownFormat,
    UnreadableFile,
)

PARQUET_MAGIC = b"PAR1"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeSeries:
    """One named attribute column of finite scalar observations."""

    name: str
    samples: np.ndarray
    sample_rate_hz: float | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("samples must be 1-D with length >= 1")
        if not np.all(np.isfinite(samples)):
            raise NonNumericColumn(self.name, "non-finite values")
        if self.sample_rate_hz is not None and not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", _freeze(samples))

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class DatasetColumn:
    """Raw table column; ``usable`` means every cell parsed as a finite real."""

    name: str
    values: np.ndarray                 # float64; NaN where a cell did not parse
    usable: bool
    reason: str | None = None          # why unusable
    text: tuple | None = None          # original cells, kept for non-numeric columns


@dataclass(frozen=True)
class Dataset:
    source_path: str
    columns: tuple[DatasetColumn, ...]
    format: str                        # "csv" | "parquet"
    n_rows: int = field(default=0)

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise UnreadableFile(f"duplicate column names in {self.source_path}")
        if self.columns:
            lengths = {c.values.size for c in self.columns}
            if len(lengths) != 1:
                raise UnreadableFile(f"unequal column lengths in {self.source_path}")
            object.__setattr__(self, "n_rows", int(self.columns[0].values.size))

    def column(self, name: str) -> DatasetColumn:
        for c in self.columns:
            if c.name == name:
                return c
        raise MissingColumn(name)

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


@dataclass(frozen=True)
class AttributeList:
    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise EmptyAttributeList("attribute list is empty")
        seen = set()
        for n in self.names:
            if n in seen:
                raise DuplicateAttribute(n)
            seen.add(n)


def series_values(x) -> np.ndarray:
    """Accept a TimeSeries or any 1-D numeric array-like; return float64 array."""
    if isinstance(x, TimeSeries):
        return x.samples
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError("expected a 1-D series")
    return a


def _parse_cell(cell: str) -> tuple[float, bool]:
    """Parse one cell. Returns (value, is_text).

    Empty cells and 'nan'/'inf' spellings are numeric-missing, not text, so a
    padded numeric column stays trimmable; only unparseable content marks the
    column textual. Locale separators are rejected (strict float grammar).
    """
    s = cell.strip()
    if s == "":
        return math.nan, False
    try:
        return float(s), False
    except ValueError:
        return math.nan, True


def _column_from_values(name, values, text_cells=None):
    values = np.asarray(values, dtype=np.float64)
    n_bad = int(np.sum(~np.isfinite(values)))
    if n_bad == 0:
        return DatasetColumn(name, _freeze(values), usable=True)
    reason = (
        "non-numeric values"
        if text_cells is not None
        else "non-finite values"
    )
    return DatasetColumn(
        name,
        _freeze(values),
        usable=False,
        reason=f"{reason} ({n_bad}/{values.size} cells)",
        text=tuple(text_cells) if text_cells is not None else None,
    )


def _load_csv(path: Path) -> Dataset:
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except (OSError, UnicodeDecodeError) as e:
        raise UnreadableFile(f"{path}: {e}") from e
    rows = [r for r in rows if r]        # tolerate trailing blank lines
    if not rows:
        raise EmptyDataset(f"{path}: no header row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body or not header:
        raise EmptyDataset(f"{path}: zero rows or zero columns")
    width = len(header)
    for i, r in enumerate(body):
        if len(r) != width:
            raise UnreadableFile(
                f"{path}: ragged row {i + 2}: expected {width} fields, got {len(r)}"
            )
    columns = []
    for j, name in enumerate(header):
        cells = [r[j] for r in body]
        parsed = [_parse_cell(c) for c in cells]
        values = np.array([v for v, _ in parsed], dtype=np.float64)
        is_text = any(t for _, t in parsed)
        columns.append(
            _column_from_values(name, values, cells if is_text else None)
        )
    return Dataset(str(path), tuple(columns), "csv")


def _load_parquet(path: Path) -> Dataset:
    import pyarrow.parquet as pq

    try:
        table = pq.read_table(path)
    except OSError as e:
        raise UnreadableFile(f"{path}: {e}") from e
    except Exception as e:  # pyarrow raises its own ArrowInvalid family
        raise UnreadableFile(f"{path}: {e}") from e
    if table.num_rows == 0 or table.num_columns == 0:
        raise EmptyDataset(f"{path}: zero rows or zero columns")
    columns = []
    for name, col in zip(table.column_names, table.columns):
        pylist = col.to_pylist()
        values = np.empty(len(pylist), dtype=np.float64)
        text = []
        numeric = True
        for i, v in enumerate(pylist):
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                values[i] = float(v)
            elif v is None:
                values[i] = math.nan
            else:
                values[i] = math.nan
                numeric = False
            text.append("" if v is None else str(v))
        columns.append(_column_from_values(name, values, None if numeric else text))
    return Dataset(str(path), tuple(columns), "parquet")


def detect_format(path: str | Path) -> str:
    """Detect file format: extension first, then content sniffing."""
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".parquet":
        return "parquet"
    try:
        with open(p, "rb") as fh:
            head = fh.read(4)
    except OSError as e:
        raise UnreadableFile(f"{p}: {e}") from e
    if head == PARQUET_MAGIC:
        return "parquet"
    if head == b"":
        raise EmptyDataset(f"{p}: empty file")
    # Anything non-Parquet falls back to CSV; text that fails to parse as a
    # delimited table is rejected by the CSV loader, not here.
    if b"\x00" in head:
        raise UnknownFormat(f"{p}: binary content is neither CSV nor Parquet")
    return "csv"


def load_dataset(path: str | Path) -> Dataset:
    """Load a CSV or Parquet table; non-numeric columns are kept but flagged."""
    p = Path(path)
    if not p.exists():
        raise UnreadableFile(f"{p}: no such file")
    fmt = detect_format(p)
    if fmt == "parquet":
        return _load_parquet(p)
    return _load_csv(p)


def read_attribute_list(path: str | Path) -> AttributeList:
    """One attribute name per line; blanks and '#' comment lines ignored."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise UnreadableFile(f"{path}: {e}") from e
    names = []
    for line in lines:
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        names.append(s)
    if not names:
        raise EmptyAttributeList(f"{path}: no attribute names")
    seen = set()
    for n in names:
        if n in seen:
            raise DuplicateAttribute(n)
        seen.add(n)
    return AttributeList(tuple(names))


def _trim_nonfinite_edges(values: np.ndarray) -> np.ndarray:
    finite = np.isfinite(values)
    idx = np.flatnonzero(finite)
    if idx.size == 0:
        return values[:0]
    return values[idx[0]: idx[-1] + 1]


def select_column(
    dataset: Dataset,
    name: str,
    drop_leading_trailing_nan: bool = False,
    sample_rate_hz: float | None = None,
) -> TimeSeries:
    """Validate one column into a TimeSeries.

    Non-finite cells fail validation unless ``drop_leading_trailing_nan`` is
    set, which trims only a contiguous non-finite prefix/suffix; interior
    gaps still fail (they would silently bias every downstream algorithm).
    """
    col = dataset.column(name)
    if col.text is not None:
        raise NonNumericColumn(name, col.reason or "non-numeric values")
    values = col.values
    if not col.usable:
        if not drop_leading_trailing_nan:
            raise NonNumericColumn(name, col.reason or "non-finite values")
        values = _trim_nonfinite_edges(values)
        if values.size == 0:
            raise NonNumericColumn(name, "all cells non-finite")
        if not np.all(np.isfinite(values)):
            raise NonNumericColumn(name, "interior non-finite values")
    return TimeSeries(name, values, sample_rate_hz)


def select_columns(
    dataset: Dataset,
    attrs: AttributeList,
    drop_leading_trailing_nan: bool = False,
    sample_rate_hz: float | None = None,
) -> list[TimeSeries]:
    """Pure projection: returns columns in attribute-list order."""
    return [
        select_column(dataset, name, drop_leading_trailing_nan, sample_rate_hz)
        for name in attrs.names
    ]


def write_csv(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset back to CSV; floats keep >= 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([c.name for c in dataset.columns])
        for i in range(dataset.n_rows):
            row = []
            for c in dataset.columns:
                if c.text is not None:
                    row.append(c.text[i])
                else:
                    row.append(repr(float(c.values[i])))
            writer.writerow(row)
