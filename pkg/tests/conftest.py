"""Shared builders for tests: quick series construction and a fixed-splits technique."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import pytest

from segtree.series import Dimension, TimeSeries
from segtree.techniques.base import Technique, make_split_list

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def numeric_series(values, t=None, name="v", kind="numeric") -> TimeSeries:
    values = np.asarray(values, dtype=np.float64)
    if t is None:
        t = np.arange(len(values), dtype=np.int64) * 1000
    return TimeSeries(
        np.asarray(t, dtype=np.int64), [Dimension(name, kind, values)], source_name="test"
    )


def multi_series(t, **columns) -> TimeSeries:
    dims = []
    for name, vals in columns.items():
        if name.startswith("lat"):
            kind = "latitude"
        elif name.startswith("lon"):
            kind = "longitude"
        else:
            kind = "numeric"
        dims.append(Dimension(name, kind, np.asarray(vals, dtype=np.float64)))
    return TimeSeries(np.asarray(t, dtype=np.int64), dims, source_name="test")


def categorical_series(values, t=None, name="c") -> TimeSeries:
    cats: list[str] = []
    codes = []
    for v in values:
        if v is None:
            codes.append(-1)
            continue
        if v not in cats:
            cats.append(v)
        codes.append(cats.index(v))
    if t is None:
        t = np.arange(len(values), dtype=np.int64) * 1000
    dim = Dimension(name, "categorical", np.asarray(codes, dtype=np.int32), tuple(cats))
    return TimeSeries(np.asarray(t, dtype=np.int64), [dim], source_name="test")


def trajectory(points, t=None) -> TimeSeries:
    lat = np.asarray([p[0] for p in points], dtype=np.float64)
    lon = np.asarray([p[1] for p in points], dtype=np.float64)
    if t is None:
        t = np.arange(len(points), dtype=np.int64) * 1000
    return TimeSeries(
        np.asarray(t, dtype=np.int64),
        [Dimension("location-lat", "latitude", lat), Dimension("location-long", "longitude", lon)],
        source_name="test",
    )


@dataclass(frozen=True)
class FixedSplits(Technique):
    """Test-only technique emitting a preset interior split list."""

    splits: tuple = ()

    type_name = "fixed_splits"

    def params(self) -> dict:
        return {"splits": list(self.splits)}

    def split(self, view):
        return make_split_list(np.asarray(self.splits, dtype=np.int64), view.length)


@pytest.fixture
def demo_csv_bytes() -> bytes:
    with open(os.path.join(FIXTURES, "demo.csv"), "rb") as f:
        return f.read()
