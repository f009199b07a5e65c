"""Value-driven techniques: range membership, categorical changes, seasonality."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientData, ParameterOutOfRange
from ..series import CATEGORICAL, SeriesView
from .base import (
    SplitIndexList,
    Technique,
    float_dimension,
    make_split_list,
    p_number,
    p_string,
    register,
    require_float_kind,
    require_kind,
    run_labels,
    transitions,
)


@register
@dataclass(frozen=True)
class ValueRange(Technique):
    """Split when entering or leaving [r_min, r_max]; missing counts as outside."""

    dimension: str = ""
    r_min: float = 0.0
    r_max: float = 0.0

    type_name = "value_range"

    def __post_init__(self):
        if self.r_min > self.r_max:
            raise ParameterOutOfRange(
                f"r_min must be <= r_max, got [{self.r_min}, {self.r_max}]", path="value_range.r_min"
            )

    def params(self) -> dict:
        return {"dimension": self.dimension, "r_min": self.r_min, "r_max": self.r_max}

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        return cls(
            dimension=p_string(params, "dimension", path, required=True),
            r_min=p_number(params, "r_min", path, required=True),
            r_max=p_number(params, "r_max", path, required=True),
        )

    def validate_series(self, view) -> None:
        require_float_kind(view, self.dimension, self.type_name)

    def split(self, view: SeriesView) -> SplitIndexList:
        x = float_dimension(view, self.dimension, self.type_name)
        inside = (x >= self.r_min) & (x <= self.r_max)  # NaN compares False
        interior = transitions(inside)
        text = f"inside value range [{self.r_min:g}, {self.r_max:g}]"
        labels = run_labels(inside, interior, lambda flag: text if flag else None)
        return make_split_list(interior, view.length, segment_labels=labels)


@register
@dataclass(frozen=True)
class CategoricalChange(Technique):
    """Split whenever the categorical value changes; missing is its own category."""

    dimension: str = ""

    type_name = "categorical_change"

    def params(self) -> dict:
        return {"dimension": self.dimension}

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        return cls(dimension=p_string(params, "dimension", path, required=True))

    def validate_series(self, view) -> None:
        require_kind(view, self.dimension, CATEGORICAL, self.type_name)

    def split(self, view: SeriesView) -> SplitIndexList:
        dim = view.dimension(self.dimension)
        codes = dim.values
        interior = transitions(codes)
        cats = dim.categories or ()
        labels = run_labels(
            codes, interior, lambda c: cats[int(c)] if int(c) >= 0 else "missing"
        )
        return make_split_list(interior, view.length, segment_labels=labels)


@register
@dataclass(frozen=True)
class Seasonality(Technique):
    """Split at multiples of the power-maximizing periodogram period.

    The discrete spectrum of the mean-removed signal is searched over
    frequency bins that complete at least ``min_cycles`` cycles within the
    range; the winning bin k gives period round(L / k), and splits are anchored
    at the range start.
    """

    dimension: str = ""
    min_cycles: int = 2

    type_name = "seasonality"

    def __post_init__(self):
        if self.min_cycles < 1:
            raise ParameterOutOfRange("min_cycles must be >= 1", path="seasonality.min_cycles")

    def params(self) -> dict:
        return {"dimension": self.dimension, "min_cycles": self.min_cycles}

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        return cls(
            dimension=p_string(params, "dimension", path, required=True),
            min_cycles=int(p_number(params, "min_cycles", path, default=2, minv=1, integer=True)),
        )

    def validate_series(self, view) -> None:
        require_float_kind(view, self.dimension, self.type_name)

    def detect_period(self, view: SeriesView) -> int:
        x = float_dimension(view, self.dimension, self.type_name).astype(np.float64)
        L = view.length
        if L < 2 * self.min_cycles:
            raise InsufficientData(f"need at least {2 * self.min_cycles} records, got {L}")
        valid = ~np.isnan(x)
        if not valid.any():
            raise InsufficientData("all values missing")
        mean = float(x[valid].mean())
        y = np.where(valid, x, mean) - mean
        power = np.abs(np.fft.rfft(y)) ** 2
        k_lo, k_hi = self.min_cycles, L // 2
        if k_hi < k_lo:
            raise InsufficientData(f"no frequency bin completes {self.min_cycles} cycles in {L} records")
        k_star = k_lo + int(np.argmax(power[k_lo : k_hi + 1]))
        return max(1, int(np.floor(L / k_star + 0.5)))

    def split(self, view: SeriesView) -> SplitIndexList:
        p = self.detect_period(view)
        return make_split_list(np.arange(p, view.length, p, dtype=np.int64), view.length)
