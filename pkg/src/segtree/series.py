"""Time series container, CSV ingestion, and dimension kind detection.

External contracts use 1-based record indices; arrays are 0-based internally.
Timestamps are UTC epoch milliseconds (int64).
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import (
    IntervalOutOfBounds,
    MissingTimestampColumn,
    NonMonotonicAfterSort,
    RaggedRow,
    UnparsableValue,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"
LATITUDE = "latitude"
LONGITUDE = "longitude"

KINDS = (NUMERIC, CATEGORICAL, LATITUDE, LONGITUDE)

_LAT_HEADERS = {"lat", "latitude", "location-lat"}
_LONG_HEADERS = {"long", "lon", "longitude", "location-long"}

_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class Dimension:
    """One value column; ``categories`` maps codes to strings for categorical."""

    name: str
    kind: str
    values: np.ndarray = field(repr=False)
    categories: tuple[str, ...] | None = None

    def __len__(self) -> int:
        return len(self.values)

    def category_of(self, code: int) -> str | None:
        if code < 0 or self.categories is None:
            return None
        return self.categories[code]


@dataclass(frozen=True)
class IndexInterval:
    """Closed 1-based record interval [from_, to]."""

    from_: int
    to: int

    def __post_init__(self):
        if not (1 <= self.from_ <= self.to):
            raise IntervalOutOfBounds(f"invalid interval [{self.from_}, {self.to}]")

    @property
    def length(self) -> int:
        return self.to - self.from_ + 1


class SeriesView:
    """Zero-copy window over a series; local indices are 1..length."""

    __slots__ = ("t", "dims", "_by_name", "offset")

    def __init__(self, t: np.ndarray, dims: list[Dimension], offset: int = 1):
        self.t = t
        self.dims = dims
        self._by_name = {d.name: d for d in dims}
        self.offset = offset  # global 1-based index of local record 1

    @property
    def length(self) -> int:
        return len(self.t)

    def dimension(self, name: str) -> Dimension:
        try:
            return self._by_name[name]
        except KeyError:
            from .errors import UnknownDimension

            raise UnknownDimension(f"no dimension named {name!r}") from None

    def has_dimension(self, name: str) -> bool:
        return name in self._by_name

    def first_of_kind(self, kind: str) -> Dimension | None:
        for d in self.dims:
            if d.kind == kind:
                return d
        return None


class TimeSeries:
    """Immutable pair of strictly increasing timestamps and value dimensions."""

    def __init__(self, timestamps: np.ndarray, dimensions: list[Dimension], source_name: str = ""):
        t = np.asarray(timestamps, dtype=np.int64)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("timestamps must be a non-empty 1-D array")
        if t.size > 1 and not np.all(t[1:] > t[:-1]):
            raise NonMonotonicAfterSort("timestamps must be strictly increasing")
        for d in dimensions:
            if len(d.values) != t.size:
                raise ValueError(f"dimension {d.name!r} has length {len(d.values)}, expected {t.size}")
            if d.kind == LATITUDE:
                _check_coord_range(d, -90.0, 90.0)
            elif d.kind == LONGITUDE:
                _check_coord_range(d, -180.0, 180.0)
        self.timestamps = t
        self.dimensions = list(dimensions)
        self.source_name = source_name
        self._by_name = {d.name: d for d in dimensions}
        t.setflags(write=False)
        for d in dimensions:
            d.values.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.timestamps.size)

    def dimension(self, name: str) -> Dimension:
        try:
            return self._by_name[name]
        except KeyError:
            from .errors import UnknownDimension

            raise UnknownDimension(f"no dimension named {name!r}") from None

    def view(self, from_: int, to: int) -> SeriesView:
        if not (1 <= from_ <= to <= self.n):
            raise IntervalOutOfBounds(f"[{from_}, {to}] outside 1..{self.n}")
        lo, hi = from_ - 1, to
        dims = [
            Dimension(d.name, d.kind, d.values[lo:hi], d.categories) for d in self.dimensions
        ]
        return SeriesView(self.timestamps[lo:hi], dims, offset=from_)

    def summary(self) -> dict:
        return {
            "name": self.source_name,
            "n": self.n,
            "dimensions": [
                {"name": d.name, "kind": d.kind, "categories": list(d.categories or [])}
                for d in self.dimensions
            ],
            "start_timestamp": iso_utc(int(self.timestamps[0])),
            "end_timestamp": iso_utc(int(self.timestamps[-1])),
        }

    def equals(self, other: "TimeSeries") -> bool:
        if self.n != other.n or self.source_name != other.source_name:
            return False
        if not np.array_equal(self.timestamps, other.timestamps):
            return False
        if len(self.dimensions) != len(other.dimensions):
            return False
        for a, b in zip(self.dimensions, other.dimensions):
            if a.name != b.name or a.kind != b.kind or a.categories != b.categories:
                return False
            if not np.array_equal(a.values, b.values, equal_nan=True):
                return False
        return True


def slice_view(series: TimeSeries, interval: IndexInterval) -> SeriesView:
    return series.view(interval.from_, interval.to)


def _check_coord_range(d: Dimension, lo: float, hi: float):
    v = d.values
    bad = np.where(~np.isnan(v) & ((v < lo) | (v > hi)))[0]
    if bad.size:
        i = int(bad[0])
        raise UnparsableValue(
            f"{d.kind} value {v[i]!r} outside [{lo}, {hi}] in column {d.name!r}",
            row=i + 1,
            column=d.name,
        )


def detect_dimension_kinds(headers: list[str], sample_rows: list[list[str]] | None = None) -> list[str]:
    """Assign a kind per header: lat/long by header name, else content-based."""
    sample_rows = sample_rows or []
    kinds = []
    for j, h in enumerate(headers):
        key = h.strip().lower()
        if key in _LAT_HEADERS:
            kinds.append(LATITUDE)
            continue
        if key in _LONG_HEADERS:
            kinds.append(LONGITUDE)
            continue
        kind = NUMERIC
        for row in sample_rows:
            if j >= len(row):
                continue
            cell = row[j].strip()
            if cell == "":
                continue
            if not _is_number(cell):
                kind = CATEGORICAL
                break
        kinds.append(kind)
    return kinds


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def parse_csv(data: bytes | str, hints: dict[str, str] | None = None, source_name: str = "") -> TimeSeries:
    """Parse a UTF-8 CSV with a mandatory header and ``timestamp`` column.

    Rows are sorted by timestamp; duplicate timestamps are rejected. ``hints``
    may force a column kind. Error locations use 1-based data row numbers.
    """
    hints = hints or {}
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        frame = pd.read_csv(io.StringIO(text), dtype="object", keep_default_na=False, skip_blank_lines=True)
    except pd.errors.ParserError as exc:
        raise RaggedRow(str(exc)) from exc
    except pd.errors.EmptyDataError as exc:
        raise MissingTimestampColumn("empty input, no header row") from exc

    if "timestamp" not in frame.columns:
        raise MissingTimestampColumn("CSV must have a column named 'timestamp'")
    if frame.shape[0] < 1:
        raise UnparsableValue("CSV has a header but no data rows")

    ts = _parse_timestamps(frame["timestamp"])
    order = np.argsort(ts, kind="stable")
    ts = ts[order]
    if ts.size > 1:
        dup = np.where(np.diff(ts) <= 0)[0]
        if dup.size:
            raise NonMonotonicAfterSort(
                f"duplicate timestamp {iso_utc(int(ts[dup[0]]))} ({int(ts[dup[0]])} ms)"
            )

    dims = []
    for name in frame.columns:
        if name == "timestamp":
            continue
        raw = frame[name].to_numpy(dtype=object)[order]
        kind = hints.get(name) or _infer_kind(name, raw)
        dims.append(_build_dimension(name, kind, raw, forced=name in hints))
    return TimeSeries(ts, dims, source_name=source_name)


def _parse_timestamps(col: pd.Series) -> np.ndarray:
    raw = col.to_numpy(dtype=object)
    empties = np.array([str(x).strip() == "" for x in raw])
    if empties.any():
        raise UnparsableValue(
            "missing timestamp", row=int(np.where(empties)[0][0]) + 1, column="timestamp"
        )
    as_str = [str(x).strip() for x in raw]
    if all(_INT_RE.match(s) for s in as_str):
        return np.array([int(s) for s in as_str], dtype=np.int64)
    parsed = pd.to_datetime(pd.Series(as_str), utc=True, errors="coerce", format="ISO8601")
    bad = parsed.isna().to_numpy()
    if bad.any():
        i = int(np.where(bad)[0][0])
        raise UnparsableValue(
            f"unparsable timestamp {as_str[i]!r}", row=i + 1, column="timestamp"
        )
    return (parsed.to_numpy(dtype="datetime64[ns]").astype("int64") // 1_000_000).astype(np.int64)


def _infer_kind(name: str, raw: np.ndarray) -> str:
    key = name.strip().lower()
    if key in _LAT_HEADERS:
        return LATITUDE
    if key in _LONG_HEADERS:
        return LONGITUDE
    for x in raw:
        s = str(x).strip()
        if s == "" or s.upper() in ("NA", "NAN", "NULL"):
            continue
        if not _is_number(s):
            return CATEGORICAL
    return NUMERIC


def _build_dimension(name: str, kind: str, raw: np.ndarray, forced: bool = False) -> Dimension:
    if kind not in KINDS:
        raise UnparsableValue(f"unknown kind {kind!r} for column {name!r}", column=name)
    if kind == CATEGORICAL:
        strings = [str(x).strip() for x in raw]
        mask = [s == "" or s.upper() in ("NA", "NAN", "NULL") for s in strings]
        cleaned = pd.Series([None if m else s for s, m in zip(strings, mask)], dtype=object)
        codes, uniques = pd.factorize(cleaned, use_na_sentinel=True)
        return Dimension(name, kind, codes.astype(np.int32), tuple(str(u) for u in uniques))

    values = np.empty(len(raw), dtype=np.float64)
    for i, x in enumerate(raw):
        s = str(x).strip()
        if s == "" or s.upper() in ("NA", "NAN", "NULL"):
            values[i] = np.nan
            continue
        try:
            values[i] = float(s)
        except ValueError:
            if forced or kind in (LATITUDE, LONGITUDE):
                raise UnparsableValue(
                    f"cannot parse {s!r} as {kind} in column {name!r}", row=i + 1, column=name
                ) from None
            # inference said numeric but a later value disagrees; re-infer as categorical
            return _build_dimension(name, CATEGORICAL, raw)
    return Dimension(name, kind, values)


def serialize_csv(series: TimeSeries) -> bytes:
    """Canonical CSV: epoch-ms timestamps, shortest round-trip float repr."""
    out = io.StringIO()
    names = [d.name for d in series.dimensions]
    out.write(",".join(["timestamp"] + [_csv_quote(n) for n in names]) + "\n")
    cols = []
    for d in series.dimensions:
        if d.kind == CATEGORICAL:
            cats = d.categories or ()
            cols.append([("" if c < 0 else _csv_quote(cats[c])) for c in d.values])
        else:
            cols.append([("" if math.isnan(v) else repr(float(v))) for v in d.values])
    ts = series.timestamps
    for i in range(series.n):
        out.write(str(int(ts[i])))
        for col in cols:
            out.write(",")
            out.write(col[i])
        out.write("\n")
    return out.getvalue().encode("utf-8")


def _csv_quote(s: str) -> str:
    if any(ch in s for ch in ',"\n\r'):
        return '"' + s.replace('"', '""') + '"'
    return s


def iso_utc(ms: int) -> str:
    """Epoch milliseconds to ISO-8601 UTC with millisecond precision."""
    dt = np.datetime64(ms, "ms")
    return str(dt) + "Z"
