import json
import threading

import numpy as np
import pytest

from segtree.engine import (
    EvaluationCancelled,
    SegmentTree,
    carry_over,
    evaluate,
    export_tree_csv,
    import_tree_csv,
    verify_partition,
)
from segtree.errors import UnknownNode
from segtree.query import QueryLevel, QuerySpec, TechniqueNode, parse_query
from segtree.techniques import TECHNIQUES

from conftest import FixedSplits, multi_series, numeric_series


def q(doc):
    return parse_query(json.dumps(doc))


def bins(width, selector="all"):
    return {"selector": selector, "node": {"technique": {"type": "bins", "params": {"mode": "count", "width": width}}}}


def fixed_query(*levels):
    return QuerySpec(tuple(QueryLevel(TechniqueNode(FixedSplits(t)), sel) for t, sel in levels))


class TestEvaluate:
    def test_offset_projection_example(self):
        s = numeric_series(np.zeros(10))
        tree = evaluate(fixed_query(((4,), "all")), s)
        assert [(c.from_, c.to) for c in tree.root.children] == [(1, 4), (5, 10)]
        assert [c.level for c in tree.root.children] == [1, 1]

    def test_two_levels_local_offsets(self):
        s = numeric_series(np.zeros(12))
        tree = evaluate(q({"levels": [bins(6), bins(2)]}), s)
        lvl1 = tree.root.children
        assert [(c.from_, c.to) for c in lvl1] == [(1, 6), (7, 12)]
        assert [(g.from_, g.to) for c in lvl1 for g in c.children] == [
            (1, 2), (3, 4), (5, 6), (7, 8), (9, 10), (11, 12)]
        assert verify_partition(tree) == []

    def test_empty_bookmarks_prune_deeper_levels(self):
        s = numeric_series(np.zeros(10))
        tree = evaluate(q({"levels": [bins(5), bins(2, "bookmarked_only")]}), s)
        assert len(tree.root.children) == 2
        assert all(not c.children for c in tree.root.children)

    def test_bookmarked_only_selects_marked_parent(self):
        s = numeric_series(np.zeros(10))
        first = evaluate(q({"levels": [bins(5)]}), s)
        target = first.root.children[0].id
        tree = evaluate(q({"levels": [bins(5), bins(2, "bookmarked_only")]}), s, bookmarks={target})
        marked, unmarked = tree.root.children
        assert marked.id == target and len(marked.children) == 3
        assert unmarked.children == []
        assert marked.bookmarked

    def test_pass_through_child_only_with_deeper_levels(self):
        s = numeric_series(np.zeros(10))
        leafy = evaluate(fixed_query(((), "all")), s)
        assert leafy.root.children == []  # last level, no interior splits
        deeper = evaluate(fixed_query(((), "all"), ((5,), "all")), s)
        assert [(c.from_, c.to) for c in deeper.root.children] == [(1, 10)]
        assert [(g.from_, g.to) for g in deeper.root.children[0].children] == [(1, 5), (6, 10)]

    def test_node_ids_stable_across_deeper_refinement(self):
        s = numeric_series(np.zeros(12))
        a = evaluate(q({"levels": [bins(6)]}), s)
        b = evaluate(q({"levels": [bins(6), bins(3)]}), s)
        assert [c.id for c in a.root.children] == [c.id for c in b.root.children]

    def test_subtree_independence(self):
        rng = np.random.default_rng(31)
        s = numeric_series(rng.normal(size=60))
        full = evaluate(q({"levels": [bins(20), bins(7)]}), s)
        parent = full.root.children[1]
        # re-applying level 2 over just this parent's range reproduces its children
        from segtree.techniques import Bins, get_split_indices

        sil = get_split_indices(Bins("count", 7), s, parent.from_, parent.to)
        expect = [
            (int(a) + parent.from_, int(b) + parent.from_ - 1)
            for a, b in zip(sil.indices[:-1], sil.indices[1:])
        ]
        assert [(c.from_, c.to) for c in parent.children] == expect

    def test_failure_degrades_to_passthrough_with_warning(self):
        s = numeric_series(np.zeros(10))

        from dataclasses import dataclass

        from segtree.errors import TechniqueError
        from segtree.techniques.base import Technique

        @dataclass(frozen=True)
        class Exploding(Technique):
            type_name = "exploding"

            def params(self):
                return {}

            def split(self, view):
                raise TechniqueError("boom")

        tree = evaluate(
            QuerySpec((QueryLevel(TechniqueNode(Exploding()), "all"),
                       QueryLevel(TechniqueNode(FixedSplits((5,))), "all"))), s)
        assert tree.warnings and "boom" in tree.warnings[0]["message"]
        assert tree.warnings[0]["level"] == 1
        assert [(c.from_, c.to) for c in tree.root.children] == [(1, 10)]

    def test_cancellation(self):
        s = numeric_series(np.zeros(10))
        cancel = threading.Event()
        cancel.set()
        with pytest.raises(EvaluationCancelled):
            evaluate(q({"levels": [bins(2)]}), s, cancel=cancel)

    def test_parallel_and_cached_runs_identical(self):
        rng = np.random.default_rng(7)
        s = multi_series(np.arange(500) * 1000, v=rng.normal(size=500))
        doc = {"levels": [bins(100), {"selector": "all", "node": {"technique": {
            "type": "change_points", "params": {"dimension": "v", "mode": "fixed_k", "k": 2}}}}]}
        base = evaluate(q(doc), s, workers=1, cache=False)
        for workers in (2, 4):
            assert evaluate(q(doc), s, workers=workers, cache=False).to_json() == base.to_json()
        assert evaluate(q(doc), s, workers=1, cache=True).to_json() == base.to_json()
        shared: dict = {}
        evaluate(q(doc), s, cache=shared)
        assert shared  # cache actually populated
        assert evaluate(q(doc), s, cache=shared).to_json() == base.to_json()

    def test_operator_level_in_query(self):
        s = numeric_series(np.concatenate([np.zeros(5), np.ones(5)]))
        doc = {"levels": [{"selector": "all", "node": {"operator": {"op": "OR", "operands": [
            {"technique": {"type": "value_range", "params": {"dimension": "v", "r_min": 0.5, "r_max": 2}}},
            {"technique": {"type": "bins", "params": {"mode": "count", "width": 3}}},
        ]}}}]}
        tree = evaluate(q(doc), s)
        assert [(c.from_, c.to) for c in tree.root.children] == [(1, 3), (4, 5), (6, 6), (7, 9), (10, 10)]


class TestBookmarksLabels:
    def test_bookmark_and_label(self):
        s = numeric_series(np.zeros(10))
        tree = evaluate(q({"levels": [bins(5)]}), s)
        tree.set_bookmark(tree.root.id, True)
        assert tree.root.id in tree.bookmarked_ids()
        tree.label_node(tree.root.children[0].id, "interesting")
        assert "interesting" in tree.root.children[0].all_labels()
        with pytest.raises(UnknownNode):
            tree.label_node("feedbeef", "x")
        with pytest.raises(UnknownNode):
            tree.set_bookmark("feedbeef", True)

    def test_labels_survive_requery_on_unchanged_ancestors(self):
        s = numeric_series(np.zeros(12))
        t1 = evaluate(q({"levels": [bins(6)]}), s)
        keep = t1.root.children[0].id
        t1.label_node(keep, "my label")
        t1.set_bookmark(keep, True)
        t2 = evaluate(q({"levels": [bins(6), bins(2)]}), s, bookmarks=t1.bookmarked_ids())
        carry_over(t1, t2)
        again = t2.node(keep)
        assert "my label" in again.all_labels()
        assert again.bookmarked

    def test_automatic_labels_attached(self):
        s = numeric_series([0.0, 5.0, 5.0, 0.0])
        doc = {"levels": [{"selector": "all", "node": {"technique": {
            "type": "value_range", "params": {"dimension": "v", "r_min": 3, "r_max": 6}}}}]}
        tree = evaluate(q(doc), s)
        labels = [c.all_labels() for c in tree.root.children]
        assert labels == [[], ["inside value range [3, 6]"], []]


class TestTreeCsv:
    def test_single_root_tree(self):
        s = numeric_series(np.zeros(3))
        tree = evaluate(fixed_query(((), "all")), s)
        data = export_tree_csv(tree).decode()
        assert len(data.splitlines()) == 2  # header + root

    def test_children_reference_root(self):
        s = numeric_series(np.zeros(4))
        tree = evaluate(fixed_query(((2,), "all")), s)
        lines = export_tree_csv(tree).decode().splitlines()
        assert len(lines) == 4
        root_id = lines[1].split(",")[0]
        assert lines[2].split(",")[1] == root_id

    def test_export_import_export_fixed_point(self):
        rng = np.random.default_rng(3)
        s = multi_series(np.arange(100) * 60_000, v=rng.normal(size=100))
        doc = {"levels": [bins(25), {"selector": "all", "node": {"technique": {
            "type": "value_range", "params": {"dimension": "v", "r_min": -0.5, "r_max": 0.5}}}}]}
        tree = evaluate(q(doc), s)
        tree.set_bookmark(tree.root.children[1].id, True)
        tree.label_node(tree.root.children[2].id, "note; with ; semicolons are not allowed".replace(";", "|"))
        one = export_tree_csv(tree)
        two = export_tree_csv(import_tree_csv(one))
        assert one == two
        back = import_tree_csv(one)
        assert back.node_count == tree.node_count
        assert back.root.to == 100
        assert back.node(tree.root.children[1].id).bookmarked

    def test_verify_partition_flags_corruption(self):
        s = numeric_series(np.zeros(10))
        tree = evaluate(q({"levels": [bins(5)]}), s)
        tree.root.children[0].to = 4  # break contiguity
        assert verify_partition(tree)


class TestPartitionFuzz:
    def test_random_queries_maintain_partition(self):
        rng = np.random.default_rng(2024)
        for _ in range(40):
            n = int(rng.integers(2, 400))
            t = np.cumsum(rng.integers(1, 5000, size=n)).astype(np.int64)
            s = multi_series(t, v=rng.normal(size=n))
            levels = []
            for _ in range(int(rng.integers(1, 4))):
                choice = rng.integers(0, 4)
                if choice == 0:
                    levels.append(bins(int(rng.integers(1, 12))))
                elif choice == 1:
                    levels.append({"selector": "all", "node": {"technique": {
                        "type": "temporal_gaps", "params": {"factor": 5}}}})
                elif choice == 2:
                    levels.append({"selector": "all", "node": {"technique": {
                        "type": "value_range", "params": {"dimension": "v", "r_min": -1, "r_max": 1}}}})
                else:
                    levels.append({"selector": "all", "node": {"technique": {
                        "type": "change_points", "params": {"dimension": "v", "mode": "fixed_k",
                                                            "k": int(rng.integers(1, 3))}}}})
            tree = evaluate(q({"levels": levels}), s)
            assert verify_partition(tree) == []
