"""Figure rendering for CLI reports: segmentation overview, similarity, anomalies."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Rectangle

from .anomaly import ANOMALY_TYPES, AnomalyHistogram, PointAnomaly
from .engine import SegmentTree
from .guidance import SiblingSimilarity, color_position

DIVERGING = plt.get_cmap("RdBu_r")  # blue = pattern, white = neutral, red = anomaly
TYPE_COLORS = {
    "lof": "#1b9e77",
    "mad_global": "#d95f02",
    "shesd": "#7570b3",
    "innovative_outlier": "#e7298a",
    "temporary_change": "#66a61e",
}


def segment_overview(tree: SegmentTree, path: str, max_label_levels: int = 6) -> None:
    """Icicle-style overview: one row per level, stripes sized by record span."""
    levels: dict[int, list] = {}
    for node in tree.nodes():
        levels.setdefault(node.level, []).append(node)
    depth = max(levels) + 1
    n = tree.root.to
    fig, ax = plt.subplots(figsize=(11, 0.8 + 0.6 * depth))
    cmap = plt.get_cmap("Blues")
    for lvl, nodes in sorted(levels.items()):
        y = depth - lvl - 1
        for node in nodes:
            w = node.to - node.from_ + 1
            ax.add_patch(
                Rectangle(
                    (node.from_ - 1, y), w, 0.9,
                    facecolor=cmap(0.25 + 0.5 * lvl / max(1, depth - 1)),
                    edgecolor="white", linewidth=0.5,
                )
            )
            label = f"{node.from_}-{node.to}"
            if lvl <= max_label_levels and w / n > 0.04:
                ax.text(node.from_ - 1 + w / 2, y + 0.45, label,
                        ha="center", va="center", fontsize=7, color="black")
    ax.set_xlim(0, n)
    ax.set_ylim(0, depth)
    ax.set_yticks([depth - l - 0.5 for l in sorted(levels)])
    ax.set_yticklabels([f"level {l}" for l in sorted(levels)])
    ax.set_xlabel("record index")
    ax.set_title(f"segment tree: {tree.node_count} nodes over {n} records")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def similarity_figure(sims: list[SiblingSimilarity], path: str) -> None:
    """Sibling mean-distance bars tinted by diverging color-scale position."""
    if not sims:
        return
    fig, ax = plt.subplots(figsize=(max(4, 0.8 * len(sims)), 3.5))
    xs = np.arange(len(sims))
    for i, sm in enumerate(sims):
        pos = color_position(sm.d_bar, sm.scale_domain)
        ax.bar(i, sm.d_bar, color=DIVERGING(pos), edgecolor="gray")
    lo, hi, mid = sims[0].scale_domain
    ax.axhline(mid, color="gray", linestyle="--", linewidth=0.8, label=f"midpoint {mid:.3g}")
    ax.set_xticks(xs)
    ax.set_xticklabels([sm.node_id[:8] for sm in sims], rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("mean sibling distance")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def anomaly_figure(
    indices: np.ndarray,
    values: np.ndarray,
    anomalies: list[PointAnomaly],
    overlay: list[int],
    histogram: AnomalyHistogram,
    path: str,
    dimension: str = "",
) -> None:
    """Line chart with typed anomaly squares, 7-slot density strip, stacked bars."""
    fig, (ax_line, ax_bar) = plt.subplots(
        2, 1, figsize=(11, 6), gridspec_kw={"height_ratios": [2.2, 1]}
    )
    ax_line.plot(indices, values, linewidth=0.7, color="#444444")
    by_index = {int(i): v for i, v in zip(indices, values)}
    seen = set()
    for a in anomalies:
        v = by_index.get(a.index)
        if v is None:
            continue
        lab = a.type if a.type not in seen else None
        seen.add(a.type)
        ax_line.scatter([a.index], [v], marker="s", s=26,
                        color=TYPE_COLORS.get(a.type, "black"), label=lab, zorder=3)
    reds = plt.get_cmap("Reds")
    top = ax_line.get_ylim()[1]
    span = (indices[-1] - indices[0] + 1) / 7 if len(indices) else 1
    peak = max(overlay) if any(overlay) else 1
    for i, c in enumerate(overlay):
        ax_line.add_patch(
            Rectangle((indices[0] + i * span, top), span, (ax_line.get_ylim()[1] - ax_line.get_ylim()[0]) * 0.05,
                      facecolor=reds(c / peak), edgecolor="gray", clip_on=False, linewidth=0.4)
        )
    ax_line.set_ylabel(dimension or "value")
    if seen:
        ax_line.legend(fontsize=7, loc="upper right")

    counts = np.asarray(histogram.counts)
    bottoms = np.zeros(histogram.bin_count)
    xs = np.arange(histogram.bin_count)
    for j, t in enumerate(ANOMALY_TYPES):
        col = counts[:, j]
        if col.any():
            ax_bar.bar(xs, col, bottom=bottoms, color=TYPE_COLORS[t], label=t)
        bottoms += col
    ax_bar.set_xlabel("bin")
    ax_bar.set_ylabel(histogram.normalization)
    if bottoms.any():
        ax_bar.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
