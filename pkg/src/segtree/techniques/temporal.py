"""Value-independent techniques: temporal gaps and fixed-width bins."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterOutOfRange
from ..series import SeriesView
from .base import (
    SplitIndexList,
    Technique,
    make_split_list,
    p_number,
    p_string,
    register,
    transitions,
)

MS_PER_DAY = 86_400_000
CALENDAR_UNITS = ("day", "week", "month")


@register
@dataclass(frozen=True)
class TemporalGaps(Technique):
    """Split after every anomalously large time difference between records.

    A gap dt is anomalous when its robust z-score (dt - median) / (1.4826 * MAD)
    exceeds ``factor``. With MAD = 0 (heavily regular sampling) the rule falls
    back to dt > factor * median.
    """

    factor: float = 10.0

    type_name = "temporal_gaps"

    def params(self) -> dict:
        return {"factor": self.factor}

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        return cls(factor=p_number(params, "factor", path, default=10.0, minv=0.0))

    def split(self, view: SeriesView) -> SplitIndexList:
        L = view.length
        dt = np.diff(view.t).astype(np.float64)
        med = float(np.median(dt))
        mad = float(np.median(np.abs(dt - med)))
        if mad > 0.0:
            anomalous = (dt - med) / (1.4826 * mad) > self.factor
        else:
            anomalous = dt > self.factor * med
        return make_split_list(np.nonzero(anomalous)[0] + 1, L)


@register
@dataclass(frozen=True)
class Bins(Technique):
    """Fixed-width bins by record count, duration, or calendar unit.

    count: split every ``width`` records. duration: ``width`` is a span in
    milliseconds measured from the range's first timestamp. calendar: ``width``
    names a UTC unit (day = midnight, week = Monday, month = first of month);
    a record exactly on a boundary starts the new bin. The trailing remainder
    forms a final shorter bin.
    """

    mode: str = "count"
    width: int | float | str = 1

    type_name = "bins"

    def __post_init__(self):
        if self.mode == "calendar":
            if self.width not in CALENDAR_UNITS:
                raise ParameterOutOfRange(
                    f"calendar width must be one of {CALENDAR_UNITS}, got {self.width!r}",
                    path="bins.width",
                )
        elif self.mode in ("count", "duration"):
            if not isinstance(self.width, (int, float)) or self.width <= 0:
                raise ParameterOutOfRange(
                    f"{self.mode} width must be a positive number, got {self.width!r}",
                    path="bins.width",
                )
            if self.mode == "count" and int(self.width) != self.width:
                raise ParameterOutOfRange("count width must be an integer", path="bins.width")
        else:
            raise ParameterOutOfRange(f"unknown bins mode {self.mode!r}", path="bins.mode")

    def params(self) -> dict:
        return {"mode": self.mode, "width": self.width}

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        mode = p_string(params, "mode", path, choices=("count", "duration", "calendar"), required=True)
        if mode == "calendar":
            width = p_string(params, "width", path, choices=CALENDAR_UNITS, required=True)
        else:
            width = p_number(params, "width", path, required=True, integer=(mode == "count"))
        return cls(mode=mode, width=width)

    def split(self, view: SeriesView) -> SplitIndexList:
        L = view.length
        if self.mode == "count":
            w = int(self.width)
            return make_split_list(np.arange(w, L, w, dtype=np.int64), L)
        if self.mode == "duration":
            ids = (view.t - view.t[0]) // int(self.width)
            return make_split_list(transitions(ids), L)
        return make_split_list(transitions(_calendar_ids(view.t, str(self.width))), L)


def _calendar_ids(t: np.ndarray, unit: str) -> np.ndarray:
    day = np.floor_divide(t, MS_PER_DAY)
    if unit == "day":
        return day
    if unit == "week":
        # epoch day 0 is a Thursday; +3 aligns week boundaries to Mondays
        return np.floor_divide(day + 3, 7)
    return t.astype("datetime64[ms]").astype("datetime64[M]").astype(np.int64)
