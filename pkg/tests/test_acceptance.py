"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per criterion.
"""

import itertools
import json
import math
import os
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from segtree.anomaly import ANOMALY_TYPES, PointAnomaly, aggregate, detect_mad, lof_scores
from segtree.cli import main as cli_main
from segtree.engine import apply_operator, evaluate, export_tree_csv, import_tree_csv, verify_partition
from segtree.guidance import color_position, dtw_distance, sibling_distances
from segtree.query import QueryLevel, QuerySpec, TechniqueNode, parse_query
from segtree.series import Dimension, TimeSeries
from segtree.service import SessionStore, create_app
from segtree.techniques import Seasonality, TemporalGaps, get_split_indices

from conftest import FIXTURES, FixedSplits, numeric_series
from test_anomaly import reference_lof
from test_operators import chain_oracle


def ok(name):
    print(f"\n[ACCEPTANCE] {name}: PASS")


def test_operator_oracle_suite():
    """OR/AND/NOT vs set oracles, AFTER/NEAR vs chain oracle, 1000 instances < 10 s."""
    rng = np.random.default_rng(6021)
    start = time.time()
    for _ in range(1000):
        L = int(rng.integers(2, 51))
        s = numeric_series(np.zeros(L))
        ints = [
            sorted(set(rng.integers(1, L, size=rng.integers(0, 9)).tolist()))
            for _ in range(int(rng.integers(2, 4)))
        ]
        nodes = [TechniqueNode(FixedSplits(tuple(i))) for i in ints]
        theta = int(rng.integers(0, 7))

        union = sorted(set().union(*map(set, ints)))
        inter = sorted(set(ints[0]).intersection(*map(set, ints[1:])))
        comp = sorted(set(range(1, L)) - set(ints[0]))
        assert apply_operator("OR", nodes, None, s, 1, L).interior.tolist() == union
        assert apply_operator("AND", nodes, None, s, 1, L).interior.tolist() == inter
        assert apply_operator("NOT", [nodes[0]], None, s, 1, L).interior.tolist() == comp
        assert apply_operator("AFTER", nodes, theta, s, 1, L).interior.tolist() == chain_oracle(
            ints, theta, near=False
        )
        assert apply_operator("NEAR", nodes, theta, s, 1, L).interior.tolist() == chain_oracle(
            ints, theta, near=True
        )
    elapsed = time.time() - start
    assert elapsed < 10.0, f"operator suite took {elapsed:.1f}s"
    ok(f"operator oracle suite (1000 instances, {elapsed:.1f}s)")


def _random_series(rng, n):
    t = np.cumsum(rng.integers(1, 10_000, size=n)).astype(np.int64)
    v = rng.normal(0, 1, n)
    v[rng.random(n) < 0.05] = np.nan
    codes = rng.integers(0, 3, size=n).astype(np.int32)
    walk = np.cumsum(rng.normal(0, 0.002, size=(n, 2)), axis=0)
    dims = [
        Dimension("v", "numeric", v),
        Dimension("c", "categorical", codes, ("a", "b", "x")),
        Dimension("lat", "latitude", np.clip(walk[:, 0], -89, 89)),
        Dimension("long", "longitude", np.clip(walk[:, 1], -179, 179)),
    ]
    return TimeSeries(t, dims, source_name="fuzz")


def _random_node(rng, n):
    pick = rng.choice(
        ["gaps", "bins", "cp", "range", "cat", "season", "motif", "pattern", "geo", "dbscan", "fpt", "op"],
        p=[0.12, 0.16, 0.12, 0.16, 0.10, 0.08, 0.04, 0.06, 0.05, 0.05, 0.02, 0.04],
    )
    if pick == "op":
        op = str(rng.choice(["OR", "AND", "AFTER", "NEAR", "NOT"]))
        k = 1 if op == "NOT" else 2
        theta = int(rng.integers(0, 5)) if op in ("AFTER", "NEAR") else None
        return {"operator": {"op": op, "theta": theta,
                             "operands": [_random_leaf(rng, n) for _ in range(k)]}}
    return _random_leaf(rng, n, pick)


def _random_leaf(rng, n, pick=None):
    if pick is None or pick == "op":
        pick = rng.choice(["gaps", "bins", "range", "cat"])
    if pick == "gaps":
        return {"technique": {"type": "temporal_gaps", "params": {"factor": int(rng.integers(3, 20))}}}
    if pick == "bins":
        mode = str(rng.choice(["count", "duration", "calendar"]))
        width = (int(rng.integers(1, max(2, n // 2))) if mode == "count"
                 else int(rng.integers(5_000, 500_000)) if mode == "duration"
                 else str(rng.choice(["day", "week", "month"])))
        return {"technique": {"type": "bins", "params": {"mode": mode, "width": width}}}
    if pick == "cp":
        if rng.random() < 0.5:
            return {"technique": {"type": "change_points", "params": {
                "dimension": "v", "mode": "fixed_k", "k": int(rng.integers(1, 4))}}}
        return {"technique": {"type": "change_points", "params": {
            "dimension": "v", "mode": "penalty", "beta": float(rng.uniform(0.5, 20))}}}
    if pick == "range":
        lo, hi = sorted(rng.normal(0, 1, 2).tolist())
        return {"technique": {"type": "value_range", "params": {"dimension": "v", "r_min": lo, "r_max": hi}}}
    if pick == "cat":
        return {"technique": {"type": "categorical_change", "params": {"dimension": "c"}}}
    if pick == "season":
        return {"technique": {"type": "seasonality", "params": {"dimension": "v",
                                                                "min_cycles": int(rng.integers(1, 4))}}}
    if pick == "motif":
        return {"technique": {"type": "motif_representatives", "params": {
            "dimension": "v", "motif_length": int(rng.integers(3, 9)), "top_k": int(rng.integers(1, 3))}}}
    if pick == "pattern":
        return {"technique": {"type": "pattern_matches", "params": {
            "dimension": "v", "pattern": rng.normal(0, 1, int(rng.integers(3, 7))).tolist(),
            "threshold": float(rng.uniform(0, 3))}}}
    if pick == "geo":
        la, lo = float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))
        d = float(rng.uniform(0.01, 0.5))
        return {"technique": {"type": "geo_area", "params": {
            "polygon": [[la + d, lo - d], [la + d, lo + d], [la - d, lo + d], [la - d, lo - d]]}}}
    if pick == "dbscan":
        return {"technique": {"type": "density_clusters", "params": {
            "eps": float(rng.uniform(100, 5000)), "min_pts": int(rng.integers(2, 6))}}}
    return {"technique": {"type": "fpt_minima", "params": {
        "radius": float(rng.uniform(100, 2000)), "prominence": float(rng.uniform(0, 100))}}}


def test_partition_invariant_fuzz():
    """500 random series x random 1-4-level queries: exact partition, zero violations."""
    rng = np.random.default_rng(777)
    violations = 0
    for i in range(500):
        n = int(np.exp(rng.uniform(np.log(2), np.log(5000))))
        series = _random_series(rng, n)
        levels = []
        for _ in range(int(rng.integers(1, 5))):
            selector = "bookmarked_only" if rng.random() < 0.05 else "all"
            levels.append({"selector": selector, "node": _random_node(rng, n)})
        query = parse_query({"levels": levels})
        tree = evaluate(query, series)  # SplitIndexList contract checked on every call
        problems = verify_partition(tree)
        if problems:
            violations += 1
            print(f"violation in trial {i}: {problems[:3]}")
    assert violations == 0
    ok("partition invariant fuzz (500 series, 0 violations)")


def test_change_point_recovery():
    """3 plateaus with >= 5 sigma jumps: both change points within +-1 in >= 99/100 trials."""
    rng = np.random.default_rng(4242)
    hits = 0
    for _ in range(100):
        sigma = 1.0
        a, b, c = (int(rng.integers(40, 120)) for _ in range(3))
        jump1 = float(rng.choice([-1, 1])) * rng.uniform(5, 12) * sigma
        jump2 = float(rng.choice([-1, 1])) * rng.uniform(5, 12) * sigma
        x = np.concatenate([
            np.zeros(a), np.full(b, jump1), np.full(c, jump1 + jump2)
        ]) + rng.normal(0, sigma, a + b + c)
        out = get_split_indices(
            parse_query({"levels": [{"selector": "all", "node": {"technique": {
                "type": "change_points",
                "params": {"dimension": "v", "mode": "fixed_k", "k": 2}}}}]}
            ).levels[0].node.spec,
            numeric_series(x),
        )
        got = out.interior.tolist()
        if len(got) == 2 and abs(got[0] - a) <= 1 and abs(got[1] - (a + b)) <= 1:
            hits += 1
    assert hits >= 99, f"recovered in only {hits}/100 trials"
    ok(f"change-point recovery ({hits}/100 within +-1)")


def test_temporal_gap_1_2m_records():
    """Synthetic 1.2M-record series with exactly 2 large gaps -> exactly 2 interior splits."""
    n = 1_200_000
    t = np.arange(n, dtype=np.int64) * 1000
    t[400_000:] += 48 * 3_600 * 1000
    t[900_000:] += 72 * 3_600 * 1000
    s = TimeSeries(t, [Dimension("v", "numeric", np.zeros(n))])
    out = get_split_indices(TemporalGaps(), s)
    assert out.interior.tolist() == [400_000, 900_000]
    ok("temporal-gap scenario (2 splits out of 1.2M records)")


def test_seasonality_recovery():
    """Sine of period 50, n=5000, SNR 10: detected period 50 +- 1, splits at multiples."""
    rng = np.random.default_rng(99)
    n = 5000
    signal = np.sin(2 * np.pi * np.arange(n) / 50)
    noise_sigma = math.sqrt((signal.var()) / 10)  # SNR 10
    x = signal + rng.normal(0, noise_sigma, n)
    s = numeric_series(x)
    spec = Seasonality("v")
    p = spec.detect_period(s.view(1, n))
    assert abs(p - 50) <= 1
    out = get_split_indices(spec, s)
    assert out.indices.tolist() == list(range(0, n + 1, p)) + ([n] if n % p else [])
    ok(f"seasonality (period {p}, splits at multiples)")


def dtw_oracle_dp(a, b):
    """Iterative restatement of the recursive DTW definition (independent of engine)."""
    n, m = len(a), len(b)
    D = [[math.inf] * (m + 1) for _ in range(n + 1)]
    D[0][0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            D[i][j] = abs(a[i - 1] - b[j - 1]) + min(D[i - 1][j], D[i][j - 1], D[i - 1][j - 1])
    return D[n][m]


def test_dtw_exhaustive_oracle():
    """Engine DTW == recursive-definition oracle on all sequences len<=5, values in [0,3]."""
    seqs = [p for ln in range(1, 6) for p in itertools.product(range(4), repeat=ln)]
    arrays = [np.array(p, dtype=np.float64).reshape(-1, 1) for p in seqs]
    for i in range(len(seqs)):
        ai = arrays[i]
        for j in range(i, len(seqs)):
            assert dtw_distance(ai, arrays[j]) == dtw_oracle_dp(seqs[i], seqs[j])
    rng = np.random.default_rng(5150)
    for _ in range(10_000):
        a = rng.integers(0, 4, size=rng.integers(1, 6)).astype(float)
        b = rng.integers(0, 4, size=rng.integers(1, 6)).astype(float)
        assert dtw_distance(a, a) == 0.0
        assert dtw_distance(a, b) == dtw_distance(b, a)
    ok(f"DTW exhaustive oracle ({len(seqs)}^2/2 pairs + 10k symmetry pairs)")


def test_guidance_sanity():
    """Two identical siblings share the strictly lowest d-bar; exact midpoint formula."""
    base = np.sin(np.arange(40) / 3.0)
    x = np.concatenate([base, base, np.cumsum(np.abs(np.cos(np.arange(40))))])
    s = numeric_series(x)
    tree = evaluate(parse_query({"levels": [{"selector": "all", "node": {"technique": {
        "type": "bins", "params": {"mode": "count", "width": 40}}}}]}), s)
    sims = sibling_distances(tree, tree.root.id, ["v"])
    d = [sm.d_bar for sm in sims]
    assert d[0] == d[1] < d[2]
    lo, hi, mid = sims[0].scale_domain
    assert lo == min(d) and hi == max(d)
    assert mid == (lo + hi) / 2
    assert color_position(mid, sims[0].scale_domain) == 0.5
    ok("guidance sanity (identical pair lowest, midpoint exact)")


def test_anomaly_oracles():
    """MAD example, LOF vs literal reference on 20-point instances, histogram sums."""
    flagged = detect_mad([1, 2, 3, 4, 100])
    assert [a.index for a in flagged] == [5]
    assert detect_mad([3.0] * 12) == []

    rng = np.random.default_rng(808)
    for _ in range(10):
        pts = rng.normal(0, 1, 20)
        pts[int(rng.integers(0, 20))] += rng.uniform(4, 9)
        for k in (2, 3, 5):
            assert np.allclose(lof_scores(pts, k), reference_lof(pts, k))

    an = [PointAnomaly(int(i), str(rng.choice(ANOMALY_TYPES)), 1.0)
          for i in rng.integers(1, 500, size=200)]
    per_bin = aggregate(an, 1, 500, 9, "per_bin_percent")
    for row in per_bin.counts:
        assert abs(sum(row) - 100.0) < 1e-9 or sum(row) == 0.0
    per_type = aggregate(an, 1, 500, 9, "per_type_percent")
    for ccol in np.asarray(per_type.counts).sum(axis=0):
        assert abs(ccol - 100.0) < 1e-9 or ccol == 0.0
    ok("anomaly oracles (MAD, LOF reference, histogram sums)")


def _scalability_series():
    n = 1_200_000
    t = np.arange(n, dtype=np.int64) * 1000
    t[400_000:] += 36_000_000
    t[900_000:] += 72_000_000
    v = np.sin(2 * np.pi * np.arange(n) / 100_000)
    return TimeSeries(t, [Dimension("v", "numeric", v)], source_name="big")


SCALABILITY_QUERY = {"levels": [
    {"selector": "all", "node": {"technique": {"type": "temporal_gaps", "params": {"factor": 10}}}},
    {"selector": "all", "node": {"technique": {"type": "bins", "params": {"mode": "count", "width": 25000}}}},
    {"selector": "all", "node": {"technique": {"type": "value_range",
                                               "params": {"dimension": "v", "r_min": 0, "r_max": 1}}}},
]}


def test_scalability_1_2m_records_under_10s():
    """3-level query over 1.2M records < 10 s; 4-worker and serial trees identical."""
    s = _scalability_series()
    query = parse_query(SCALABILITY_QUERY)
    start = time.time()
    parallel = evaluate(query, s, workers=4)
    elapsed = time.time() - start
    serial = evaluate(query, s, workers=1)
    assert parallel.to_json() == serial.to_json()
    assert verify_partition(parallel) == []
    assert elapsed < 10.0, f"evaluation took {elapsed:.2f}s"
    ok(f"scalability (1.2M records in {elapsed:.2f}s, parallel == serial, "
       f"{parallel.node_count} nodes)")


def test_determinism_and_round_trips(tmp_path):
    """CLI vs service byte-identical tree CSV; query/tree export fixed points."""
    demo = os.path.join(FIXTURES, "demo.csv")
    with open(os.path.join(FIXTURES, "query_vulture.json")) as f:
        vulture_raw = f.read()

    # CLI run (no bookmarks: level 2+ prune under bookmarked_only, still a valid tree)
    qpath = tmp_path / "q.json"
    qpath.write_text(vulture_raw)
    out = tmp_path / "tree.csv"
    assert cli_main(["segment", "--series", demo, "--query", str(qpath), "--out", str(out)]) == 0
    cli_bytes = out.read_bytes()

    client = TestClient(create_app(store=SessionStore()))
    sid = client.post("/sessions").json()["session_id"]
    with open(demo, "rb") as f:
        client.post(f"/sessions/{sid}/series?name=demo", content=f.read())
    client.post(f"/sessions/{sid}/series/demo/query", content=vulture_raw)
    service_bytes = client.get(f"/sessions/{sid}/series/demo/export?kind=tree_csv").content
    assert cli_bytes == service_bytes

    exported_query = client.get(f"/sessions/{sid}/series/demo/export?kind=query_json").text
    assert exported_query == vulture_raw
    assert parse_query(exported_query).to_json() == exported_query

    once = export_tree_csv(import_tree_csv(cli_bytes))
    twice = export_tree_csv(import_tree_csv(once))
    assert once == twice == cli_bytes
    ok("determinism & round trips (CLI == service, export fixed points)")
