"""GPS-based techniques: polygon membership, density clusters, first-passage time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks
from sklearn.cluster import DBSCAN

from ..errors import InsufficientData, ParameterOutOfRange
from ..series import SeriesView
from .base import (
    SplitIndexList,
    Technique,
    geo_dimensions,
    make_split_list,
    p_number,
    register,
    run_labels,
    transitions,
)

EARTH_RADIUS_M = 6_371_000.0


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters between degree coordinates (vectorized)."""
    p1 = np.radians(lat1)
    p2 = np.radians(lat2)
    dp = p2 - p1
    dl = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dp / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def points_in_polygon(lat: np.ndarray, lon: np.ndarray, polygon) -> np.ndarray:
    """Even-odd ray cast on (lat, long); points on an edge count as inside."""
    y = np.asarray(lat, dtype=np.float64)
    x = np.asarray(lon, dtype=np.float64)
    inside = np.zeros(y.shape, dtype=bool)
    boundary = np.zeros(y.shape, dtype=bool)
    eps = 1e-9
    verts = list(polygon)
    for (y1, x1), (y2, x2) in zip(verts, verts[1:] + verts[:1]):
        if y1 == y2 and x1 == x2:
            continue
        spans = (y1 > y) != (y2 > y)
        if spans.any():
            xs = (x2 - x1) * (y[spans] - y1) / (y2 - y1) + x1
            hit = np.zeros(y.shape, dtype=bool)
            hit[spans] = x[spans] < xs
            inside ^= hit
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        on_line = np.abs(cross) <= eps * max(1.0, abs(x2 - x1) + abs(y2 - y1))
        in_box = (
            (x >= min(x1, x2) - eps)
            & (x <= max(x1, x2) + eps)
            & (y >= min(y1, y2) - eps)
            & (y <= max(y1, y2) + eps)
        )
        boundary |= on_line & in_box
    out = inside | boundary
    out[np.isnan(y) | np.isnan(x)] = False
    return out


def _validated_polygon(polygon, path: str) -> tuple[tuple[float, float], ...]:
    if not isinstance(polygon, (list, tuple)) or len(polygon) < 3:
        raise ParameterOutOfRange("polygon needs at least 3 vertices", path=path)
    out = []
    for v in polygon:
        if not isinstance(v, (list, tuple)) or len(v) != 2:
            raise ParameterOutOfRange("polygon vertices must be [lat, long] pairs", path=path)
        la, lo = v[0], v[1]
        if any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in (la, lo)):
            raise ParameterOutOfRange("polygon vertices must be numeric", path=path)
        if not (-90.0 <= la <= 90.0) or not (-180.0 <= lo <= 180.0):
            raise ParameterOutOfRange(f"vertex ({la}, {lo}) out of coordinate range", path=path)
        out.append((la, lo))
    return tuple(out)


@register
@dataclass(frozen=True)
class GeoArea(Technique):
    """Split when the trajectory enters or leaves a polygon; missing GPS is outside."""

    polygon: tuple[tuple[float, float], ...] = ()

    type_name = "geo_area"

    def __post_init__(self):
        object.__setattr__(self, "polygon", _validated_polygon(self.polygon, "geo_area.polygon"))

    def params(self) -> dict:
        return {"polygon": [[la, lo] for la, lo in self.polygon]}

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        return cls(polygon=_validated_polygon(params.get("polygon"), f"{path}.polygon"))

    def validate_series(self, view) -> None:
        geo_dimensions(view, self.type_name)

    def split(self, view: SeriesView) -> SplitIndexList:
        lat, lon = geo_dimensions(view, self.type_name)
        inside = points_in_polygon(lat.values, lon.values, self.polygon)
        interior = transitions(inside)
        labels = run_labels(inside, interior, lambda f: "inside area" if f else None)
        return make_split_list(interior, view.length, segment_labels=labels)


@register
@dataclass(frozen=True)
class DensityClusters(Technique):
    """Split when entering or leaving a spatial density cluster.

    DBSCAN over (lat, long) with the haversine metric; ``eps`` is in meters.
    Records with missing coordinates form their own run label.
    """

    eps: float = 0.0
    min_pts: int = 1

    type_name = "density_clusters"

    def __post_init__(self):
        if self.eps <= 0:
            raise ParameterOutOfRange("eps must be > 0 meters", path="density_clusters.eps")
        if self.min_pts < 1:
            raise ParameterOutOfRange("min_pts must be >= 1", path="density_clusters.min_pts")

    def params(self) -> dict:
        return {"eps": self.eps, "min_pts": self.min_pts}

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        return cls(
            eps=p_number(params, "eps", path, required=True),
            min_pts=int(p_number(params, "min_pts", path, required=True, minv=1, integer=True)),
        )

    def validate_series(self, view) -> None:
        geo_dimensions(view, self.type_name)

    def record_labels(self, view: SeriesView) -> np.ndarray:
        """Cluster id per record; -1 noise, -2 missing coordinates."""
        lat, lon = geo_dimensions(view, self.type_name)
        valid = ~(np.isnan(lat.values) | np.isnan(lon.values))
        labels = np.full(view.length, -2, dtype=np.int64)
        if valid.sum() > 0:
            pts = np.radians(np.column_stack([lat.values[valid], lon.values[valid]]))
            model = DBSCAN(
                eps=self.eps / EARTH_RADIUS_M,
                min_samples=self.min_pts,
                metric="haversine",
                algorithm="ball_tree",
            ).fit(pts)
            labels[valid] = model.labels_
        return labels

    def split(self, view: SeriesView) -> SplitIndexList:
        labels = self.record_labels(view)
        interior = transitions(labels)
        text = {-1: "noise", -2: "no position"}
        seg_labels = run_labels(labels, interior, lambda c: text.get(int(c), f"cluster {int(c)}"))
        return make_split_list(interior, view.length, segment_labels=seg_labels)


@register
@dataclass(frozen=True)
class FptMinima(Technique):
    """Split at prominent local minima of forward first-passage time.

    FPT(i) is the time (seconds) until the trajectory first moves more than
    ``radius`` meters away from position i; undefined where the circle is never
    left. Only strict minima with at least ``prominence`` seconds of prominence
    split.
    """

    radius: float = 0.0
    prominence: float = 0.0

    type_name = "fpt_minima"

    def __post_init__(self):
        if self.radius <= 0:
            raise ParameterOutOfRange("radius must be > 0 meters", path="fpt_minima.radius")
        if self.prominence < 0:
            raise ParameterOutOfRange("prominence must be >= 0", path="fpt_minima.prominence")

    def params(self) -> dict:
        return {"radius": self.radius, "prominence": self.prominence}

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        return cls(
            radius=p_number(params, "radius", path, required=True),
            prominence=p_number(params, "prominence", path, default=0.0, minv=0.0),
        )

    def validate_series(self, view) -> None:
        geo_dimensions(view, self.type_name)

    def fpt_seconds(self, view: SeriesView) -> np.ndarray:
        """Forward passage time per record, NaN where undefined."""
        lat, lon = geo_dimensions(view, self.type_name)
        L = view.length
        la, lo = lat.values, lon.values
        t = view.t
        fpt = np.full(L, np.nan)
        for i in range(L):
            if np.isnan(la[i]) or np.isnan(lo[i]):
                continue
            j = i + 1
            chunk = 512
            while j < L:
                hi = min(L, j + chunk)
                d = haversine_m(la[i], lo[i], la[j:hi], lo[j:hi])
                hits = np.nonzero(d > self.radius)[0]
                if hits.size:
                    k = j + int(hits[0])
                    fpt[i] = (t[k] - t[i]) / 1000.0
                    break
                j = hi
                chunk = min(chunk * 2, 65_536)
        return fpt

    def split(self, view: SeriesView) -> SplitIndexList:
        if view.length < 3:
            raise InsufficientData("first-passage minima need at least 3 records")
        fpt = self.fpt_seconds(view)
        minima: list[int] = []
        defined = np.nonzero(~np.isnan(fpt))[0]
        if defined.size:
            run_bounds = np.nonzero(np.diff(defined) > 1)[0]
            for run in np.split(defined, run_bounds + 1):
                if run.size < 3:
                    continue
                peaks, _ = find_peaks(
                    -fpt[run], prominence=(self.prominence, None), plateau_size=(1, 1)
                )
                minima.extend(int(run[p]) for p in peaks)
        return make_split_list(np.array(sorted(minima), dtype=np.int64), view.length)
