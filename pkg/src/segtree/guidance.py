"""Similarity guidance: DTW distances, mean sibling distance, color scale."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DimensionKindMismatch, EmptySequence
from .series import TimeSeries

# sibling groups above this size use a Sakoe-Chiba band to bound DTW cost
BAND_GROUP_SIZE = 64
BAND_FRACTION = 0.1


@njit(cache=True)
def _dtw_kernel(a, b, band):
    n = a.shape[0]
    m = b.shape[0]
    d = a.shape[1]
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        for j in range(m + 1):
            cur[j] = np.inf
        jlo = 1
        jhi = m
        if band >= 0:
            jlo = max(1, i - band)
            jhi = min(m, i + band)
        for j in range(jlo, jhi + 1):
            c = 0.0
            for k in range(d):
                c += abs(a[i - 1, k] - b[j - 1, k])
            best = prev[j]
            if prev[j - 1] < best:
                best = prev[j - 1]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = c + best
        for j in range(m + 1):
            prev[j] = cur[j]
    return prev[m]


def _as_steps(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise EmptySequence("DTW needs a non-empty sequence")
    return np.ascontiguousarray(arr)


def dtw_distance(a, b, band: int | None = None) -> float:
    """Dynamic time warping with L1 step cost across dimensions.

    Steps (i-1,j), (i,j-1), (i-1,j-1); an optional Sakoe-Chiba ``band`` widens
    automatically to keep the end corner reachable for unequal lengths.
    """
    aa, bb = _as_steps(a), _as_steps(b)
    if aa.shape[1] != bb.shape[1]:
        raise ValueError(f"dimension count mismatch: {aa.shape[1]} vs {bb.shape[1]}")
    if band is None:
        eff = -1
    else:
        eff = max(int(band), abs(aa.shape[0] - bb.shape[0]))
    return float(_dtw_kernel(aa, bb, eff))


def znorm(x: np.ndarray) -> np.ndarray:
    """Per-column z-normalization; constant columns map to zeros."""
    mu = np.nanmean(x, axis=0)
    sd = np.nanstd(x, axis=0)
    out = np.zeros_like(x)
    nz = sd > 0
    out[:, nz] = (x[:, nz] - mu[nz]) / sd[nz]
    return out


@dataclass(frozen=True)
class SiblingSimilarity:
    node_id: str
    d_bar: float
    scale_domain: tuple[float, float, float]  # (min, max, midpoint)
    dimension_set: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "d_bar": self.d_bar,
            "scale_domain": list(self.scale_domain),
            "dimension_set": list(self.dimension_set),
            "color_position": color_position(self.d_bar, self.scale_domain),
        }


def segment_steps(series: TimeSeries, from_: int, to: int, dimension_set) -> np.ndarray:
    """Z-normalized (length, dims) matrix for one segment; NaN rows dropped."""
    view = series.view(from_, to)
    cols = []
    for name in dimension_set:
        dim = view.dimension(name)
        if dim.kind == "categorical":
            raise DimensionKindMismatch(f"DTW guidance needs numeric dimensions, {name!r} is categorical")
        cols.append(dim.values)
    mat = np.column_stack(cols).astype(np.float64)
    mat = mat[~np.isnan(mat).any(axis=1)]
    if mat.shape[0] == 0:
        mat = np.zeros((1, len(dimension_set)))
    return znorm(mat)


def sibling_distances(tree, parent_node_id: str, dimension_set=None) -> list[SiblingSimilarity]:
    """Mean DTW distance of each child of ``parent_node_id`` to its siblings.

    Segments are z-normalized per segment and dimension before comparison.
    Fewer than two children yield an empty result.
    """
    parent = tree.node(parent_node_id)
    children = parent.children
    if len(children) < 2:
        return []
    series = tree.series
    if series is None:
        raise EmptySequence("tree is not attached to a series")
    dims = tuple(dimension_set) if dimension_set else _default_dimensions(series)
    seqs = [segment_steps(series, c.from_, c.to, dims) for c in children]
    g = len(children)
    band_for = None
    if g > BAND_GROUP_SIZE:
        band_for = lambda la, lb: max(1, math.ceil(BAND_FRACTION * max(la, lb)))
    dist = np.zeros((g, g))
    for i in range(g):
        for j in range(i + 1, g):
            band = band_for(len(seqs[i]), len(seqs[j])) if band_for else None
            dist[i, j] = dist[j, i] = dtw_distance(seqs[i], seqs[j], band=band)
    d_bar = dist.sum(axis=1) / (g - 1)
    lo, hi = float(d_bar.min()), float(d_bar.max())
    domain = (lo, hi, (lo + hi) / 2.0)
    return [
        SiblingSimilarity(c.id, float(d_bar[i]), domain, dims) for i, c in enumerate(children)
    ]


def _default_dimensions(series: TimeSeries) -> tuple[str, ...]:
    for d in series.dimensions:
        if d.kind == "numeric":
            return (d.name,)
    for d in series.dimensions:
        if d.kind != "categorical":
            return (d.name,)
    raise DimensionKindMismatch("series has no numeric dimension for DTW guidance")


def color_position(d_bar: float, scale_domain) -> float:
    """Linear [0, 1] position on the diverging scale; degenerate domains sit at 0.5.

    Anchored at the midpoint so the neutral break point maps to exactly 0.5.
    """
    lo, hi = scale_domain[0], scale_domain[1]
    if hi <= lo:
        return 0.5
    return min(1.0, max(0.0, 0.5 + (d_bar - (lo + hi) / 2.0) / (hi - lo)))
