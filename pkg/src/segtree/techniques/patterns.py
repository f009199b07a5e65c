"""Subsequence-similarity techniques built on z-normalized Euclidean distance.

Windows containing missing values are excluded from matching (infinite
distance). Constant windows compare at distance 0 to other constant windows
and infinity to non-constant ones.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

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


def sliding_stats(x: np.ndarray, m: int):
    """Per-window mean, population std, and a no-missing-values validity mask."""
    isnan = np.isnan(x)
    x0 = np.where(isnan, 0.0, x)
    c1 = np.concatenate([[0.0], np.cumsum(x0)])
    c2 = np.concatenate([[0.0], np.cumsum(x0 * x0)])
    cn = np.concatenate([[0], np.cumsum(isnan.astype(np.int64))])
    s1 = c1[m:] - c1[:-m]
    s2 = c2[m:] - c2[:-m]
    mu = s1 / m
    var = np.maximum(s2 / m - mu * mu, 0.0)
    return mu, np.sqrt(var), (cn[m:] - cn[:-m]) == 0, x0


def matrix_profile(x: np.ndarray, m: int, excl: int):
    """Nearest-neighbor z-normalized distances per window, O(L^2) time, O(L) space.

    Windows i and j are trivial matches when |i - j| < excl.
    """
    L = x.shape[0]
    W = L - m + 1
    mu, sig, valid, x0 = sliding_stats(x, m)
    row0 = np.correlate(x0, x0[:m], mode="valid")
    profile = np.full(W, np.inf)
    index = np.full(W, -1, dtype=np.int64)
    row = row0.copy()
    for i in range(W):
        if i > 0:
            nxt = np.empty_like(row)
            nxt[1:] = row[:-1] - x0[i - 1] * x0[: W - 1] + x0[i + m - 1] * x0[m : m + W - 1]
            nxt[0] = row0[i]
            row = nxt
        if not valid[i]:
            continue
        d2 = _znorm_d2(row, m, mu[i], sig[i], mu, sig, valid)
        lo = max(0, i - excl + 1)
        hi = min(W, i + excl)
        d2[lo:hi] = np.inf
        j = int(np.argmin(d2))
        if np.isfinite(d2[j]):
            profile[i] = math.sqrt(max(d2[j], 0.0))
            index[i] = j
    return profile, index


def _znorm_d2(qt, m, mu_i, sig_i, mu, sig, valid):
    """Squared z-normalized distances of window i against all windows."""
    d2 = np.full(qt.shape, np.inf)
    if sig_i == 0.0:
        both = (sig == 0.0) & valid
        d2[both] = 0.0
        return d2
    ok = (sig > 0.0) & valid
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (qt - m * mu_i * mu) / (m * sig_i * sig)
    d2[ok] = 2.0 * m * (1.0 - np.clip(ratio[ok], -1.0, 1.0))
    return d2


@register
@dataclass(frozen=True)
class MotifRepresentatives(Technique):
    """Split where the best-matching recurring subsequences begin and end.

    The ``top_k`` lowest-profile motif pairs are selected with an exclusion
    zone of ceil(motif_length / 2); each instance [s, s+m) contributes splits
    at s-1 and s-1+m (1-based s).
    """

    dimension: str = ""
    motif_length: int = 2
    top_k: int = 1

    type_name = "motif_representatives"

    def __post_init__(self):
        if self.motif_length < 2:
            raise ParameterOutOfRange("motif_length must be >= 2", path="motif_representatives.motif_length")
        if self.top_k < 1:
            raise ParameterOutOfRange("top_k must be >= 1", path="motif_representatives.top_k")

    def params(self) -> dict:
        return {"dimension": self.dimension, "motif_length": self.motif_length, "top_k": self.top_k}

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        return cls(
            dimension=p_string(params, "dimension", path, required=True),
            motif_length=int(p_number(params, "motif_length", path, required=True, minv=2, integer=True)),
            top_k=int(p_number(params, "top_k", path, default=1, minv=1, integer=True)),
        )

    def validate_series(self, view) -> None:
        require_float_kind(view, self.dimension, self.type_name)

    def split(self, view: SeriesView) -> SplitIndexList:
        m = self.motif_length
        L = view.length
        if L < 2 * m:
            raise InsufficientData(f"motifs of length {m} need at least {2 * m} records, got {L}")
        x = float_dimension(view, self.dimension, self.type_name)
        instances = motif_instances(x, m, self.top_k)
        splits = np.array(sorted({s for pair in instances for s in pair}), dtype=np.int64)
        return make_split_list(splits, L)


def motif_instances(x, m: int, top_k: int) -> list[tuple[int, int]]:
    """Top-k motif pair instances as 0-based (start, end_exclusive) windows."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 2 * m:
        return []
    excl = math.ceil(m / 2)
    profile, index = matrix_profile(x, m, excl)
    starts = _pick_motif_starts(profile, index, excl, top_k)
    return sorted((s, s + m) for s in starts)


def _pick_motif_starts(profile, index, excl, top_k):
    order = np.lexsort((np.arange(profile.shape[0]), profile))
    chosen: list[int] = []
    seen_pairs: set[tuple[int, int]] = set()
    pairs = 0
    for i in order:
        i = int(i)
        if not np.isfinite(profile[i]) or pairs >= top_k:
            break
        j = int(index[i])
        pair = (min(i, j), max(i, j))
        if pair in seen_pairs:
            continue
        seen_pairs.add(pair)
        if any(abs(i - c) < excl or abs(j - c) < excl for c in chosen):
            continue
        chosen.extend(pair)
        pairs += 1
    return chosen


@register
@dataclass(frozen=True)
class PatternMatches(Technique):
    """Split at boundaries of non-overlapping matches of a query pattern.

    The query slides over the range under z-normalized Euclidean distance;
    positions with distance <= threshold are accepted best-first without
    overlap.
    """

    dimension: str = ""
    pattern: tuple[float, ...] = ()
    threshold: float = 0.0
    distance: str = "znorm_euclidean"

    type_name = "pattern_matches"

    def __post_init__(self):
        if len(self.pattern) < 2:
            raise ParameterOutOfRange("pattern needs at least 2 values", path="pattern_matches.pattern")
        if self.threshold < 0:
            raise ParameterOutOfRange("threshold must be >= 0", path="pattern_matches.threshold")
        if self.distance != "znorm_euclidean":
            raise ParameterOutOfRange("only znorm_euclidean is supported", path="pattern_matches.distance")

    def params(self) -> dict:
        return {
            "dimension": self.dimension,
            "pattern": list(self.pattern),
            "threshold": self.threshold,
            "distance": self.distance,
        }

    @classmethod
    def from_params(cls, params: dict, path: str = "params"):
        pat = params.get("pattern")
        if not isinstance(pat, (list, tuple)) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in pat
        ):
            raise ParameterOutOfRange("pattern must be a list of numbers", path=f"{path}.pattern")
        return cls(
            dimension=p_string(params, "dimension", path, required=True),
            pattern=tuple(pat),
            threshold=p_number(params, "threshold", path, required=True, minv=0.0),
            distance=p_string(params, "distance", path, default="znorm_euclidean",
                              choices=("znorm_euclidean",)),
        )

    def validate_series(self, view) -> None:
        require_float_kind(view, self.dimension, self.type_name)

    def match_distances(self, view: SeriesView) -> np.ndarray:
        """Sliding z-normalized distance of the query at every window start."""
        q = len(self.pattern)
        L = view.length
        if L < q:
            raise InsufficientData(f"pattern of length {q} does not fit in {L} records")
        x = float_dimension(view, self.dimension, self.type_name).astype(np.float64)
        mu, sig, valid, x0 = sliding_stats(x, q)
        pat = np.asarray(self.pattern, dtype=np.float64)
        ps = float(pat.std())
        d = np.full(L - q + 1, np.inf)
        if ps == 0.0:
            d[(sig == 0.0) & valid] = 0.0
            return d
        qz = (pat - pat.mean()) / ps
        cc = np.correlate(x0, qz, mode="valid")
        qz_sum = float(qz.sum())
        ok = (sig > 0.0) & valid
        with np.errstate(divide="ignore", invalid="ignore"):
            dot = (cc - mu * qz_sum) / sig
        d2 = 2.0 * q * (1.0 - np.clip(dot[ok] / q, -1.0, 1.0))
        d[ok] = np.sqrt(np.maximum(d2, 0.0))
        return d

    def split(self, view: SeriesView) -> SplitIndexList:
        q = len(self.pattern)
        d = self.match_distances(view)
        cand = np.nonzero(d <= self.threshold)[0]
        order = cand[np.lexsort((cand, d[cand]))]
        accepted: list[int] = []
        for j in order:
            j = int(j)
            pos = bisect.bisect_left(accepted, j)
            if pos > 0 and j - accepted[pos - 1] < q:
                continue
            if pos < len(accepted) and accepted[pos] - j < q:
                continue
            accepted.insert(pos, j)
        splits = sorted({s for st in accepted for s in (st, st + q)})
        return make_split_list(np.array(splits, dtype=np.int64), view.length)
