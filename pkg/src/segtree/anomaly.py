"""Point-anomaly detection for forwarded segments, plus binned aggregation.

Detectors return 1-based indices local to the values array they are given;
callers add the segment offset for global positions. Detector defaults are
exposed as parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import PeriodTooLong, TooFewPoints

ANOMALY_TYPES = ("lof", "mad_global", "shesd", "innovative_outlier", "temporary_change")

MAD_SCALE = 1.4826


@dataclass(frozen=True)
class PointAnomaly:
    index: int  # 1-based
    type: str
    score: float

    def to_dict(self) -> dict:
        return {"index": self.index, "type": self.type, "score": self.score}


def detect_mad(values, c: float = 3.0) -> list[PointAnomaly]:
    """Global outliers by robust z-score |x - median| / (1.4826 * MAD) > c."""
    x = np.asarray(values, dtype=np.float64)
    finite = np.isfinite(x)
    if finite.sum() < 3:
        raise TooFewPoints("MAD detection needs at least 3 finite values")
    med = float(np.median(x[finite]))
    mad = float(np.median(np.abs(x[finite] - med)))
    scale = MAD_SCALE * mad
    if scale == 0.0:
        scale = float(np.std(x[finite]))
    if scale == 0.0:
        return []
    scores = np.abs(x - med) / scale
    hits = np.nonzero(finite & (scores > c))[0]
    return [PointAnomaly(int(i) + 1, "mad_global", float(scores[i])) for i in hits]


def lof_scores(points: np.ndarray, k: int) -> np.ndarray:
    """Local outlier factor per point (published reachability/lrd formulas)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    n = pts.shape[0]
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    kdist = np.partition(dist, k - 1, axis=1)[:, k - 1]
    neighbor = dist <= kdist[:, None]  # may exceed k entries on ties
    reach = np.maximum(kdist[None, :], dist)
    counts = neighbor.sum(axis=1)
    reach_sum = np.where(neighbor, reach, 0.0).sum(axis=1)
    with np.errstate(divide="ignore"):
        lrd = np.where(reach_sum > 0, counts / reach_sum, np.inf)
    lof = np.empty(n)
    with np.errstate(invalid="ignore"):
        for i in range(n):
            nb = np.nonzero(neighbor[i])[0]
            ratios = lrd[nb] / lrd[i]
            ratios[np.isnan(ratios)] = 1.0  # inf/inf: duplicate clusters are not outliers
            lof[i] = ratios.mean()
    return lof


def detect_lof(values, k: int = 10, threshold: float = 1.5) -> list[PointAnomaly]:
    """Density-based local outliers; flags LOF > threshold."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    finite = np.isfinite(x).all(axis=1)
    idx = np.nonzero(finite)[0]
    if k < 1 or idx.size <= k:
        raise TooFewPoints(f"LOF with k={k} needs more than {k} finite points")
    scores = lof_scores(x[idx], k)
    out = []
    for pos, s in zip(idx, scores):
        if s > threshold:
            out.append(PointAnomaly(int(pos) + 1, "lof", float(s)))
    return out


def detect_shesd(
    values, period: int, alpha: float = 0.05, max_anoms: float = 0.02
) -> list[PointAnomaly]:
    """Seasonal-median decomposition followed by generalized ESD on residuals."""
    x = np.asarray(values, dtype=np.float64)
    n = x.shape[0]
    if period < 1 or n < 2 * period:
        raise PeriodTooLong(f"series of {n} records needs at least 2 full periods of {period}")
    phase = np.arange(n) % period
    seasonal = np.empty(period)
    for p in range(period):
        seasonal[p] = np.nanmedian(x[phase == p])
    resid = x - seasonal[phase] - np.nanmedian(x)

    mask = np.isfinite(resid)
    nv = int(mask.sum())
    k_max = min(max(1, int(max_anoms * n)), max(0, nv - 2))
    candidates: list[tuple[int, float]] = []
    num_keep = 0
    work = mask.copy()
    for j in range(1, k_max + 1):
        r = resid[work]
        med = float(np.median(r))
        scale = MAD_SCALE * float(np.median(np.abs(r - med)))
        if scale == 0.0:
            scale = float(np.std(r))
        if scale == 0.0:
            break
        dev = np.where(work, np.abs(resid - med) / scale, -np.inf)
        i = int(np.argmax(dev))
        r_j = float(dev[i])
        p = 1.0 - alpha / (2.0 * (nv - j + 1))
        t = stats.t.ppf(p, nv - j - 1)
        lam = (nv - j) * t / np.sqrt((nv - j - 1 + t * t) * (nv - j + 1))
        candidates.append((i, r_j))
        if r_j > lam:
            num_keep = j
        work[i] = False
    return [
        PointAnomaly(i + 1, "shesd", score) for i, score in candidates[:num_keep]
    ]


def detect_io_tc(
    values, decay: float = 0.7, threshold: float = 4.0, max_flags: int | None = None
) -> list[PointAnomaly]:
    """Innovative outliers and temporary changes on AR(1) residuals.

    An IO is a single residual shock; a TC decays geometrically at ``decay``.
    Each candidate is scored by regressing its shock signature on the
    residuals; the larger statistic classifies the type. Found effects are
    removed and scoring repeats, so one shock yields one flag at its onset.
    """
    x = np.asarray(values, dtype=np.float64)
    n = x.shape[0]
    if n < 10 or not np.isfinite(x).all():
        good = np.isfinite(x).sum()
        if good < 10:
            raise TooFewPoints("IO/TC detection needs at least 10 finite values")
        x = _interpolate(x)
    phi, const = _fit_ar1(x)
    e = np.zeros(n)
    e[1:] = x[1:] - const - phi * x[:-1]

    horizon = 1
    while decay**horizon > 0.01 and horizon < 60:
        horizon += 1
    sig = np.empty(horizon)
    sig[0] = 1.0
    for i in range(1, horizon):
        sig[i] = (decay - phi) * decay ** (i - 1)
    sig_energy_full = float((sig * sig).sum())

    if max_flags is None:
        max_flags = max(2, n // 20)
    flags: list[PointAnomaly] = []
    for _ in range(max_flags):
        scale = MAD_SCALE * float(np.median(np.abs(e[1:] - np.median(e[1:]))))
        if scale == 0.0:
            scale = float(np.std(e[1:]))
        if scale == 0.0:
            break
        best = (0.0, -1, "", 0.0)  # |stat|, index, type, omega
        for t0 in range(1, n):
            m = min(horizon, n - t0)
            s = sig[:m]
            energy = float((s * s).sum())
            omega = float((e[t0 : t0 + m] * s).sum()) / energy
            tau_tc = abs(omega) * np.sqrt(energy) / scale
            tau_io = abs(e[t0]) / scale
            if tau_io >= tau_tc:
                stat, kind, om = tau_io, "innovative_outlier", e[t0]
            else:
                stat, kind, om = tau_tc, "temporary_change", omega
            if stat > best[0]:
                best = (stat, t0, kind, om)
        stat, t0, kind, om = best
        if t0 < 0 or stat <= threshold:
            break
        flags.append(PointAnomaly(t0 + 1, kind, float(stat)))
        if kind == "innovative_outlier":
            e[t0] = 0.0
        else:
            m = min(horizon, n - t0)
            e[t0 : t0 + m] -= om * sig[:m]
    flags.sort(key=lambda a: a.index)
    return flags


def _fit_ar1(x: np.ndarray) -> tuple[float, float]:
    x0, x1 = x[:-1], x[1:]
    vx = float(np.var(x0))
    if vx == 0.0:
        return 0.0, float(x.mean())
    phi = float(np.cov(x0, x1, bias=True)[0, 1] / vx)
    phi = min(0.99, max(-0.99, phi))
    return phi, float(x1.mean() - phi * x0.mean())


def _interpolate(x: np.ndarray) -> np.ndarray:
    out = x.copy()
    bad = ~np.isfinite(out)
    idx = np.arange(len(out))
    out[bad] = np.interp(idx[bad], idx[~bad], out[~bad])
    return out


@dataclass(frozen=True)
class AnomalyHistogram:
    bin_count: int
    counts: list[list[float]]  # [bin][type], ANOMALY_TYPES order
    normalization: str
    types: tuple[str, ...] = ANOMALY_TYPES

    def to_dict(self) -> dict:
        return {
            "bin_count": self.bin_count,
            "types": list(self.types),
            "normalization": self.normalization,
            "counts": self.counts,
        }


def aggregate(
    anomalies, from_: int, to: int, bin_count: int, normalization: str = "absolute"
) -> AnomalyHistogram:
    """Equal-width index bins over [from_, to]; see AnomalyHistogram invariants."""
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    if normalization not in ("absolute", "per_bin_percent", "per_type_percent"):
        raise ValueError(f"unknown normalization {normalization!r}")
    length = to - from_ + 1
    width = length / bin_count
    counts = np.zeros((bin_count, len(ANOMALY_TYPES)))
    t_index = {t: j for j, t in enumerate(ANOMALY_TYPES)}
    for a in anomalies:
        if not (from_ <= a.index <= to):
            continue
        b = min(bin_count - 1, int((a.index - from_) / width))
        counts[b, t_index[a.type]] += 1
    if normalization == "per_bin_percent":
        sums = counts.sum(axis=1, keepdims=True)
        counts = np.divide(counts * 100.0, sums, out=np.zeros_like(counts), where=sums > 0)
    elif normalization == "per_type_percent":
        sums = counts.sum(axis=0, keepdims=True)
        counts = np.divide(counts * 100.0, sums, out=np.zeros_like(counts), where=sums > 0)
    return AnomalyHistogram(bin_count, counts.tolist(), normalization)


def density_overlay(anomalies, from_: int, to: int) -> list[int]:
    """Anomaly counts per 1/7 of the segment's index domain."""
    length = to - from_ + 1
    width = length / 7
    out = [0] * 7
    for a in anomalies:
        if not (from_ <= a.index <= to):
            continue
        out[min(6, int((a.index - from_) / width))] += 1
    return out


DETECTOR_NAMES = ("lof", "mad", "shesd", "io_tc")


def run_detectors(values, detectors, params: dict | None = None) -> list[PointAnomaly]:
    """Run the named detectors over one values array; indices stay local."""
    params = params or {}
    out: list[PointAnomaly] = []
    for name in detectors:
        if name == "mad":
            out.extend(detect_mad(values, c=float(params.get("mad_c", 3.0))))
        elif name == "lof":
            out.extend(
                detect_lof(
                    values,
                    k=int(params.get("lof_k", 10)),
                    threshold=float(params.get("lof_threshold", 1.5)),
                )
            )
        elif name == "shesd":
            out.extend(
                detect_shesd(
                    values,
                    period=int(params.get("shesd_period", 24)),
                    alpha=float(params.get("shesd_alpha", 0.05)),
                    max_anoms=float(params.get("shesd_max_anoms", 0.02)),
                )
            )
        elif name == "io_tc":
            out.extend(
                detect_io_tc(
                    values,
                    decay=float(params.get("io_tc_decay", 0.7)),
                    threshold=float(params.get("io_tc_threshold", 4.0)),
                )
            )
        else:
            raise ValueError(f"unknown detector {name!r}")
    out.sort(key=lambda a: (a.index, a.type))
    return out
