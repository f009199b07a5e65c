"""Least-squares change point detection: exact DP, PELT, and binary segmentation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import InsufficientData, ParameterOutOfRange
from ..series import SeriesView
from .base import (
    SplitIndexList,
    Technique,
    float_dimension,
    make_split_list,
    p_number,
    p_string,
    register,
    require_float_kind,
)

# exact O(k*L^2) DP / PELT up to this length, binary segmentation beyond
DP_GUARD = 50_000


def _prefixes(x: np.ndarray):
    """NaN-aware prefix sums: missing values contribute nothing to the cost."""
    valid = ~np.isnan(x)
    x0 = np.where(valid, x, 0.0)
    s1 = np.concatenate([[0.0], np.cumsum(x0)])
    s2 = np.concatenate([[0.0], np.cumsum(x0 * x0)])
    cnt = np.concatenate([[0.0], np.cumsum(valid.astype(np.float64))])
    return s1, s2, cnt


@njit(cache=True)
def _cost(s1, s2, cnt, i, j):
    c = cnt[j] - cnt[i]
    if c <= 0.0:
        return 0.0
    d = s1[j] - s1[i]
    return (s2[j] - s2[i]) - d * d / c


@njit(cache=True)
def _dp_fixed_k(s1, s2, cnt, k):
    """Optimal partition into k+1 segments; returns the k interior boundaries."""
    n = s1.shape[0] - 1
    nseg = k + 1
    prev = np.empty(n + 1)
    cur = np.empty(n + 1)
    back = np.zeros((nseg + 1, n + 1), dtype=np.int64)
    for j in range(n + 1):
        prev[j] = _cost(s1, s2, cnt, 0, j)
    for s in range(2, nseg + 1):
        for j in range(n + 1):
            best = np.inf
            arg = -1
            if j >= s:
                for i in range(s - 1, j):
                    c = prev[i] + _cost(s1, s2, cnt, i, j)
                    if c < best:
                        best = c
                        arg = i
            cur[j] = best
            back[s, j] = arg
        for j in range(n + 1):
            prev[j] = cur[j]
    bounds = np.empty(k, dtype=np.int64)
    j = n
    for s in range(nseg, 1, -1):
        j = back[s, j]
        bounds[s - 2] = j
    return bounds


@njit(cache=True)
def _pelt(s1, s2, cnt, beta):
    """Penalized optimal partitioning with pruning; returns interior boundaries."""
    n = s1.shape[0] - 1
    f = np.empty(n + 1)
    f[0] = -beta
    prev = np.zeros(n + 1, dtype=np.int64)
    cand = np.empty(n + 1, dtype=np.int64)
    cand[0] = 0
    ncand = 1
    for s in range(1, n + 1):
        best = np.inf
        arg = 0
        for ci in range(ncand):
            t = cand[ci]
            c = f[t] + _cost(s1, s2, cnt, t, s) + beta
            if c < best:
                best = c
                arg = t
        f[s] = best
        prev[s] = arg
        m = 0
        for ci in range(ncand):
            t = cand[ci]
            if f[t] + _cost(s1, s2, cnt, t, s) <= f[s]:
                cand[m] = t
                m += 1
        cand[m] = s
        ncand = m + 1
    out = np.empty(n, dtype=np.int64)
    nout = 0
    j = n
    while j > 0:
        t = prev[j]
        if t > 0:
            out[nout] = t
            nout += 1
        j = t
    return out[:nout][::-1].copy()


def _best_split(s1, s2, cnt, lo: int, hi: int):
    """Best single boundary in (lo, hi); returns (gain, j) or (-inf, -1)."""
    if hi - lo < 2:
        return -np.inf, -1
    js = np.arange(lo + 1, hi)
    c_left = _cost_vec(s1, s2, cnt, np.full(js.shape, lo), js)
    c_right = _cost_vec(s1, s2, cnt, js, np.full(js.shape, hi))
    total = _cost_vec(s1, s2, cnt, np.array([lo]), np.array([hi]))[0]
    gains = total - c_left - c_right
    a = int(np.argmax(gains))
    return float(gains[a]), int(js[a])


def _cost_vec(s1, s2, cnt, i, j):
    c = cnt[j] - cnt[i]
    d = s1[j] - s1[i]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (s2[j] - s2[i]) - np.where(c > 0, d * d / np.maximum(c, 1.0), 0.0)
    return out


def _binseg(s1, s2, cnt, k: int | None = None, beta: float | None = None) -> np.ndarray:
    """Greedy top-down splitting; ties broken by position for determinism."""
    n = s1.shape[0] - 1
    chosen: list[int] = []
    heap: list[tuple[float, int, int, int]] = []
    g, j = _best_split(s1, s2, cnt, 0, n)
    if j >= 0:
        heap.append((g, 0, n, j))
    while heap:
        if k is not None and len(chosen) >= k:
            break
        heap.sort(key=lambda e: (-e[0], e[1]))
        g, lo, hi, j = heap.pop(0)
        if beta is not None and g <= beta:
            break
        if j < 0 or g == -np.inf:
            break
        chosen.append(j)
        for a, b in ((lo, j), (j, hi)):
            gg, jj = _best_split(s1, s2, cnt, a, b)
            if jj >= 0:
                heap.append((gg, a, b, jj))
    return np.sort(np.array(chosen, dtype=np.int64))


@register
@dataclass(frozen=True)
class ChangePoints(Technique):
    """Split at least-squares change points of one dimension.

    fixed_k finds exactly ``k`` change points by exact dynamic programming
    (binary segmentation beyond DP_GUARD records); penalty mode runs PELT
    with penalty ``beta``.
    """

    dimension: str = ""
    mode: str = "fixed_k"
    k: int = 1
    beta: float = 0.0
    cost: str = "l2"

    type_name = "change_points"

    def __post_init__(self):
        if self.mode not in ("fixed_k", "penalty"):
            raise ParameterOutOfRange(f"unknown mode {self.mode!r}", path="change_points.mode")
        if self.cost != "l2":
            raise ParameterOutOfRange("only the l2 cost is supported", path="change_points.cost")
        if self.mode == "fixed_k" and self.k < 1:
            raise ParameterOutOfRange("k must be >= 1", path="change_points.k")
        if self.mode == "penalty" and self.beta <= 0:
            raise ParameterOutOfRange("beta must be > 0", path="change_points.beta")

    def params(self) -> dict:
        out = {"dimension": self.dimension, "mode": self.mode}
        if self.mode == "fixed_k":
            out["k"] = self.k
        else:
            out["beta"] = self.beta
        out["cost"] = self.cost
        return out

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        dimension = p_string(params, "dimension", path, required=True)
        mode = p_string(params, "mode", path, choices=("fixed_k", "penalty"), default="fixed_k")
        cost = p_string(params, "cost", path, choices=("l2",), default="l2")
        k = p_number(params, "k", path, default=1, minv=1, integer=True)
        beta = p_number(params, "beta", path, default=0.0, minv=0.0)
        if mode == "penalty" and beta <= 0:
            raise ParameterOutOfRange("penalty mode requires beta > 0", path=f"{path}.beta")
        return cls(dimension=dimension, mode=mode, k=int(k), beta=beta, cost=cost)

    def validate_series(self, view) -> None:
        require_float_kind(view, self.dimension, self.type_name)

    def split(self, view: SeriesView) -> SplitIndexList:
        x = float_dimension(view, self.dimension, self.type_name)
        L = view.length
        s1, s2, cnt = _prefixes(x.astype(np.float64))
        if self.mode == "fixed_k":
            if cnt[-1] < self.k + 1 or self.k > L - 1:
                raise InsufficientData(
                    f"{self.k} change points need at least {self.k + 1} non-missing records"
                )
            if L <= DP_GUARD:
                bounds = _dp_fixed_k(s1, s2, cnt, self.k)
            else:
                bounds = _binseg(s1, s2, cnt, k=self.k)
            return make_split_list(bounds, L)
        if L <= DP_GUARD:
            bounds = _pelt(s1, s2, cnt, float(self.beta))
        else:
            bounds = _binseg(s1, s2, cnt, beta=float(self.beta))
        return make_split_list(bounds, L)
