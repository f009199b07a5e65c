"""Uniform split-technique contract.

Every technique maps a series window of length L to a list of unique, sorted
local split indices padded with 0 at the head and L at the tail. Consecutive
split indices delimit one child segment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    DimensionKindMismatch,
    InsufficientData,
    ParameterOutOfRange,
    TechniqueError,
    UnknownTechnique,
)
from ..series import CATEGORICAL, SeriesView, TimeSeries

FLOAT_KINDS = ("numeric", "latitude", "longitude")


@dataclass
class SplitIndexList:
    """Local split indices over an application range of length L.

    ``segment_labels``, when present, holds one optional automatic label per
    delimited segment (len(indices) - 1 entries).
    """

    indices: np.ndarray
    segment_labels: list[str | None] | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def interior(self) -> np.ndarray:
        return self.indices[1:-1]

    @property
    def length(self) -> int:
        return int(self.indices[-1])

    def tolist(self) -> list[int]:
        return [int(i) for i in self.indices]


def make_split_list(
    interior,
    length: int,
    segment_labels: list[str | None] | None = None,
    warnings: list[str] | None = None,
) -> SplitIndexList:
    """Pad, deduplicate, and sort interior split indices for a range of ``length``."""
    arr = np.asarray(interior, dtype=np.int64)
    if arr.size:
        arr = np.unique(arr)
        arr = arr[(arr > 0) & (arr < length)]
    idx = np.concatenate([[0], arr, [length]]).astype(np.int64)
    return SplitIndexList(idx, segment_labels=segment_labels, warnings=list(warnings or []))


def validate_split_list(sil: SplitIndexList, length: int) -> None:
    idx = sil.indices
    if idx.ndim != 1 or idx.size < 2:
        raise TechniqueError("split list needs at least the two padding entries")
    if idx[0] != 0 or idx[-1] != length:
        raise TechniqueError(f"split list must be padded with 0 and {length}, got {idx.tolist()}")
    if np.any(np.diff(idx) <= 0):
        raise TechniqueError(f"split indices must be strictly increasing: {idx.tolist()}")
    if sil.segment_labels is not None and len(sil.segment_labels) != idx.size - 1:
        raise TechniqueError("segment_labels must have one entry per delimited segment")


TECHNIQUES: dict[str, type] = {}


def register(cls):
    TECHNIQUES[cls.type_name] = cls
    return cls


class Technique:
    """Base class; subclasses are frozen dataclasses registered by ``type_name``."""

    type_name = ""

    def validate_series(self, view: SeriesView | TimeSeries) -> None:
        """Check dimension existence and kind; raises before evaluation starts."""

    def split(self, view: SeriesView) -> SplitIndexList:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        raise NotImplementedError

    def tag(self) -> str:
        inner = ",".join(f"{k}={_fmt(v)}" for k, v in self.params().items())
        return f"{self.type_name}({inner})"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:g}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    return str(v)


def technique_from_params(type_name: str, params: dict, path: str = "") -> Technique:
    try:
        cls = TECHNIQUES[type_name]
    except KeyError:
        raise UnknownTechnique(f"unknown technique {type_name!r}") from None
    return cls.from_params(params or {}, path=path or f"technique({type_name}).params")


def get_split_indices(
    spec: Technique, series: TimeSeries, from_: int = 1, to: int | None = None
) -> SplitIndexList:
    """Apply ``spec`` locally to [from_, to]; total over InsufficientData."""
    if to is None:
        to = series.n
    view = series.view(from_, to)
    spec.validate_series(view)
    L = view.length
    if L == 1:
        return make_split_list([], 1)
    try:
        out = spec.split(view)
    except InsufficientData as exc:
        return make_split_list([], L, warnings=[f"{spec.tag()}: {exc}"])
    validate_split_list(out, L)
    return out


# --- shared helpers ---------------------------------------------------------

def float_dimension(view: SeriesView, name: str, who: str) -> np.ndarray:
    dim = view.dimension(name)
    if dim.kind not in FLOAT_KINDS:
        raise DimensionKindMismatch(f"{who} needs a numeric dimension, {name!r} is {dim.kind}")
    return dim.values


def require_float_kind(view: SeriesView | TimeSeries, name: str, who: str) -> None:
    dims = view.dimensions if isinstance(view, TimeSeries) else view.dims
    for d in dims:
        if d.name == name:
            if d.kind not in FLOAT_KINDS:
                raise DimensionKindMismatch(f"{who} needs a numeric dimension, {name!r} is {d.kind}")
            return
    from ..errors import UnknownDimension

    raise UnknownDimension(f"{who}: no dimension named {name!r}")


def require_kind(view: SeriesView | TimeSeries, name: str, kind: str, who: str) -> None:
    dims = view.dimensions if isinstance(view, TimeSeries) else view.dims
    for d in dims:
        if d.name == name:
            if d.kind != kind:
                raise DimensionKindMismatch(f"{who} needs a {kind} dimension, {name!r} is {d.kind}")
            return
    from ..errors import UnknownDimension

    raise UnknownDimension(f"{who}: no dimension named {name!r}")


def geo_dimensions(view: SeriesView | TimeSeries, who: str):
    dims = view.dimensions if isinstance(view, TimeSeries) else view.dims
    lat = next((d for d in dims if d.kind == "latitude"), None)
    lon = next((d for d in dims if d.kind == "longitude"), None)
    if lat is None or lon is None:
        raise DimensionKindMismatch(f"{who} needs latitude and longitude dimensions")
    return lat, lon


def transitions(ids: np.ndarray) -> np.ndarray:
    """Interior split indices where consecutive records carry different ids."""
    if ids.size < 2:
        return np.empty(0, dtype=np.int64)
    return (np.nonzero(ids[1:] != ids[:-1])[0] + 1).astype(np.int64)


def run_labels(ids: np.ndarray, interior: np.ndarray, describe) -> list[str | None]:
    """One label per delimited segment, from the id of the segment's first record."""
    starts = np.concatenate([[0], interior])
    return [describe(ids[int(s)]) for s in starts]


# --- parameter extraction ----------------------------------------------------

def p_number(params: dict, key: str, path: str, default=None, minv=None, maxv=None,
             integer: bool = False, required: bool = False):
    """Extract a numeric parameter, preserving int vs float so canonical JSON
    serialization round-trips byte-identically."""
    if key not in params or params[key] is None:
        if required:
            raise ParameterOutOfRange(f"missing required parameter {key!r}", path=f"{path}.{key}")
        return default
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParameterOutOfRange(f"{key!r} must be a number, got {v!r}", path=f"{path}.{key}")
    if integer:
        if float(v) != int(v):
            raise ParameterOutOfRange(f"{key!r} must be an integer, got {v!r}", path=f"{path}.{key}")
        v = int(v)
    if minv is not None and v < minv:
        raise ParameterOutOfRange(f"{key!r} must be >= {minv}, got {v}", path=f"{path}.{key}")
    if maxv is not None and v > maxv:
        raise ParameterOutOfRange(f"{key!r} must be <= {maxv}, got {v}", path=f"{path}.{key}")
    return v


def p_string(params: dict, key: str, path: str, default=None, choices=None, required: bool = False):
    if key not in params or params[key] is None:
        if required:
            raise ParameterOutOfRange(f"missing required parameter {key!r}", path=f"{path}.{key}")
        return default
    v = params[key]
    if not isinstance(v, str):
        raise ParameterOutOfRange(f"{key!r} must be a string, got {v!r}", path=f"{path}.{key}")
    if choices is not None and v not in choices:
        raise ParameterOutOfRange(
            f"{key!r} must be one of {sorted(choices)}, got {v!r}", path=f"{path}.{key}"
        )
    return v
