"""Recursive query evaluation: operators, segment trees, CSV export/import.

Each level applies one query node to every selected parent segment; the
resulting local split indices are projected to global indices with offset
o = parent.from (local 0 maps to the parent start, local L past its end).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationCancelled, SegtreeError, UnknownNode
from .query import OperatorNode, QueryNode, QuerySpec, TechniqueNode, node_key
from .series import TimeSeries, iso_utc
from .techniques import SplitIndexList, get_split_indices, make_split_list

TREE_CSV_COLUMNS = [
    "node_id",
    "parent_id",
    "level",
    "from",
    "to",
    "from_timestamp",
    "to_timestamp",
    "labels",
    "bookmarked",
    "technique_tag",
]


def node_id(level: int, from_: int, to: int, technique_tag: str) -> str:
    """Stable across re-evaluation: unchanged subtrees keep their ids."""
    key = f"{level}|{from_}|{to}|{technique_tag}".encode()
    return hashlib.blake2b(key, digest_size=8).hexdigest()


@dataclass
class SegmentNode:
    id: str
    from_: int
    to: int
    level: int
    technique_tag: str
    labels: list[str] = field(default_factory=list)
    user_labels: list[str] = field(default_factory=list)
    bookmarked: bool = False
    children: list["SegmentNode"] = field(default_factory=list)
    parent_id: str | None = None
    from_ts: str | None = None  # cached for trees imported without a series
    to_ts: str | None = None

    @property
    def length(self) -> int:
        return self.to - self.from_ + 1

    def all_labels(self) -> list[str]:
        return self.labels + self.user_labels

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "from": self.from_,
            "to": self.to,
            "level": self.level,
            "technique_tag": self.technique_tag,
            "labels": self.all_labels(),
            "bookmarked": self.bookmarked,
            "children": [c.to_dict() for c in self.children],
        }


class SegmentTree:
    """Nested index intervals; children exactly partition their parent."""

    def __init__(self, root: SegmentNode, series: TimeSeries | None = None,
                 warnings: list[dict] | None = None):
        self.root = root
        self.series = series
        self.warnings = warnings or []
        self._index: dict[str, SegmentNode] = {}
        self.rebuild_index()

    def rebuild_index(self) -> None:
        self._index = {n.id: n for n in self.nodes()}

    def nodes(self):
        """Pre-order traversal."""
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def node(self, node_id_: str) -> SegmentNode:
        try:
            return self._index[node_id_]
        except KeyError:
            raise UnknownNode(f"no node with id {node_id_!r}") from None

    def parent_of(self, node_id_: str) -> SegmentNode | None:
        n = self.node(node_id_)
        return self._index.get(n.parent_id) if n.parent_id else None

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    def set_bookmark(self, node_id_: str, flag: bool) -> None:
        self.node(node_id_).bookmarked = bool(flag)

    def bookmarked_ids(self) -> set[str]:
        return {n.id for n in self.nodes() if n.bookmarked}

    def label_node(self, node_id_: str, text: str) -> None:
        self.node(node_id_).user_labels.append(text)

    def to_dict(self) -> dict:
        return {
            "series": self.series.source_name if self.series else "",
            "n": self.root.to,
            "node_count": self.node_count,
            "warnings": self.warnings,
            "root": self.root.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), ensure_ascii=False)


def carry_over(old: SegmentTree, new: SegmentTree) -> None:
    """Move user labels and bookmark flags onto identically-identified nodes."""
    for node in new.nodes():
        prev = old._index.get(node.id)
        if prev is not None:
            node.user_labels = list(prev.user_labels)
            if prev.bookmarked:
                node.bookmarked = True


# --- operator template -------------------------------------------------------

def _interior(sil: SplitIndexList) -> np.ndarray:
    return sil.indices[1:-1]


def _chain_starts(interiors: list[np.ndarray], theta: int, near: bool) -> np.ndarray:
    """Start indices of theta-chains threading every operand in order."""
    feasible = interiors[-1]
    for prev in reversed(interiors[:-1]):
        if feasible.size == 0 or prev.size == 0:
            return np.empty(0, dtype=np.int64)
        lo = prev - theta if near else prev
        hi = prev + theta
        left = np.searchsorted(feasible, lo, side="left")
        right = np.searchsorted(feasible, hi, side="right")
        feasible = prev[right > left]
    return feasible


class _Ctx:
    def __init__(self, series: TimeSeries, cache: dict | None, cancel: threading.Event | None):
        self.series = series
        self.cache = cache
        self.cancel = cancel


def _node_splits(node: QueryNode, from_: int, to: int, ctx: _Ctx) -> SplitIndexList:
    if ctx.cancel is not None and ctx.cancel.is_set():
        raise EvaluationCancelled("evaluation cancelled")
    key = None
    if ctx.cache is not None:
        key = (node_key(node), from_, to)
        hit = ctx.cache.get(key)
        if hit is not None:
            return hit
    if isinstance(node, TechniqueNode):
        out = get_split_indices(node.spec, ctx.series, from_, to)
    else:
        out = _apply_operator(node, from_, to, ctx)
    if key is not None:
        ctx.cache[key] = out
    return out


def _apply_operator(node: OperatorNode, from_: int, to: int, ctx: _Ctx) -> SplitIndexList:
    L = to - from_ + 1
    parts = [_node_splits(o, from_, to, ctx) for o in node.operands]
    warnings = [w for p in parts for w in p.warnings]
    interiors = [_interior(p) for p in parts]
    if node.op == "OR":
        merged = np.concatenate(interiors) if interiors else np.empty(0, dtype=np.int64)
    elif node.op == "AND":
        merged = interiors[0]
        for nxt in interiors[1:]:
            merged = np.intersect1d(merged, nxt)
    elif node.op in ("AFTER", "NEAR"):
        merged = _chain_starts(interiors, int(node.theta or 0), near=node.op == "NEAR")
    elif node.op == "NOT":
        universe = np.arange(1, L, dtype=np.int64)
        merged = np.setdiff1d(universe, interiors[0])
    else:
        raise SegtreeError(f"unknown operator {node.op!r}")
    return make_split_list(merged, L, warnings=warnings)


def apply_operator(op: str, operands, theta: int | None, series: TimeSeries,
                   from_: int, to: int) -> SplitIndexList:
    """Stand-alone operator application over [from_, to]."""
    node = OperatorNode(op=op, operands=tuple(operands), theta=theta)
    return _apply_operator(node, from_, to, _Ctx(series, None, None))


# --- evaluation ---------------------------------------------------------------

def evaluate(
    query: QuerySpec,
    series: TimeSeries,
    bookmarks=(),
    workers: int = 1,
    cache: dict | bool | None = True,
    progress=None,
    cancel: threading.Event | None = None,
) -> SegmentTree:
    """Evaluate the query level by level into a segment tree over [1, n].

    ``bookmarks`` is a set of node ids (typically from a prior tree; ids are
    stable) consumed by bookmarked_only selectors. Sibling application ranges
    may be processed by ``workers`` threads; results are schedule-independent.
    Per-parent technique failures degrade to an unsplit segment plus a warning.
    """
    query.validate_series(series)
    marks = set(bookmarks)
    cache_dict: dict | None
    if cache is True:
        cache_dict = {}
    elif cache is False:
        cache_dict = None
    else:
        cache_dict = cache
    ctx = _Ctx(series, cache_dict, cancel)

    n = series.n
    root = SegmentNode(node_id(0, 1, n, "root"), 1, n, 0, "root")
    root.bookmarked = root.id in marks
    tree = SegmentTree(root, series)

    frontier = [root]
    total_levels = len(query.levels)
    for li, level in enumerate(query.levels):
        if cancel is not None and cancel.is_set():
            raise EvaluationCancelled("evaluation cancelled")
        is_last = li == total_levels - 1
        selected = [p for p in frontier if level.selector == "all" or p.bookmarked or p.id in marks]
        tag = level.node.tag()

        def task(parent: SegmentNode):
            try:
                return _node_splits(level.node, parent.from_, parent.to, ctx)
            except EvaluationCancelled:
                raise
            except (SegtreeError, ValueError, ArithmeticError) as exc:
                out = make_split_list([], parent.to - parent.from_ + 1)
                out.warnings.append(f"{tag} failed on [{parent.from_}, {parent.to}]: {exc}")
                return out

        if workers > 1 and len(selected) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(task, selected))
        else:
            results = [task(p) for p in selected]

        frontier = []
        for parent, sil in zip(selected, results):
            for msg in sil.warnings:
                tree.warnings.append(
                    {"level": li + 1, "from": parent.from_, "to": parent.to, "message": msg}
                )
            idx = sil.indices
            if idx.size == 2 and is_last:
                continue  # nothing to split and no deeper level: parent stays a leaf
            offset = parent.from_
            seg_labels = sil.segment_labels
            for j in range(idx.size - 1):
                c_from = int(idx[j]) + offset
                c_to = int(idx[j + 1]) + offset - 1
                child = SegmentNode(
                    node_id(li + 1, c_from, c_to, tag), c_from, c_to, li + 1, tag,
                    parent_id=parent.id,
                )
                if seg_labels is not None and seg_labels[j]:
                    child.labels.append(seg_labels[j])
                child.bookmarked = child.id in marks
                parent.children.append(child)
                frontier.append(child)
        if progress is not None:
            progress(li + 1, total_levels)

    tree.rebuild_index()
    return tree


def verify_partition(tree: SegmentTree) -> list[str]:
    """Check the exact-partition invariant; returns human-readable violations."""
    problems = []
    for node in tree.nodes():
        if not node.children:
            continue
        kids = node.children
        if kids[0].from_ != node.from_:
            problems.append(f"{node.id}: first child starts at {kids[0].from_}, parent at {node.from_}")
        if kids[-1].to != node.to:
            problems.append(f"{node.id}: last child ends at {kids[-1].to}, parent at {node.to}")
        for a, b in zip(kids, kids[1:]):
            if b.from_ != a.to + 1:
                problems.append(f"{node.id}: gap/overlap between children at {a.to}..{b.from_}")
        for c in kids:
            if c.level != node.level + 1:
                problems.append(f"{c.id}: level {c.level}, parent level {node.level}")
            if not (node.from_ <= c.from_ <= c.to <= node.to):
                problems.append(f"{c.id}: child [{c.from_},{c.to}] outside parent")
    return problems


# --- CSV export / import -------------------------------------------------------

def export_tree_csv(tree: SegmentTree) -> bytes:
    """One row per node, pre-order; labels ;-joined; timestamps ISO-8601 UTC."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TREE_CSV_COLUMNS)
    ts = tree.series.timestamps if tree.series is not None else None
    for node in tree.nodes():
        if ts is not None:
            f_ts = iso_utc(int(ts[node.from_ - 1]))
            t_ts = iso_utc(int(ts[node.to - 1]))
        else:
            f_ts = node.from_ts or ""
            t_ts = node.to_ts or ""
        w.writerow(
            [
                node.id,
                node.parent_id or "",
                node.level,
                node.from_,
                node.to,
                f_ts,
                t_ts,
                ";".join(node.all_labels()),
                "true" if node.bookmarked else "false",
                node.technique_tag,
            ]
        )
    return out.getvalue().encode("utf-8")


def import_tree_csv(data: bytes | str) -> SegmentTree:
    """Rebuild a (series-detached) tree from export_tree_csv output."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != TREE_CSV_COLUMNS:
        raise SegtreeError(f"tree CSV must start with header {','.join(TREE_CSV_COLUMNS)}")
    nodes: dict[str, SegmentNode] = {}
    root = None
    for r in rows[1:]:
        if len(r) != len(TREE_CSV_COLUMNS):
            raise SegtreeError(f"tree CSV row has {len(r)} columns, expected {len(TREE_CSV_COLUMNS)}")
        nid, parent_id, level, from_, to, f_ts, t_ts, labels, bookmarked, tag = r
        node = SegmentNode(
            nid, int(from_), int(to), int(level), tag,
            labels=[x for x in labels.split(";") if x],
            bookmarked=bookmarked == "true",
            parent_id=parent_id or None,
            from_ts=f_ts, to_ts=t_ts,
        )
        nodes[nid] = node
        if parent_id:
            if parent_id not in nodes:
                raise SegtreeError(f"row for {nid} references unknown parent {parent_id}")
            nodes[parent_id].children.append(node)
        elif root is None:
            root = node
        else:
            raise SegtreeError("tree CSV has multiple roots")
    if root is None:
        raise SegtreeError("tree CSV has no root row")
    return SegmentTree(root, series=None)
