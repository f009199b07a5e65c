import math

import numpy as np

from segtree.techniques import MotifRepresentatives, PatternMatches, get_split_indices
from segtree.techniques.patterns import motif_instances

from conftest import numeric_series


def znorm_dist(a, b):
    """Literal z-normalized Euclidean distance between two windows."""

    def z(x):
        x = np.asarray(x, dtype=np.float64)
        sd = x.std()
        if sd == 0:
            return None
        return (x - x.mean()) / sd

    za, zb = z(a), z(b)
    if za is None and zb is None:
        return 0.0
    if za is None or zb is None:
        return math.inf
    return float(np.sqrt(((za - zb) ** 2).sum()))


def best_pair_oracle(x, m, excl):
    """All-pairs scan for the closest non-trivial window pair."""
    W = len(x) - m + 1
    best = (math.inf, None)
    for i in range(W):
        for j in range(i + excl, W):
            d = znorm_dist(x[i : i + m], x[j : j + m])
            if d < best[0]:
                best = (d, (i, j))
    return best


def test_planted_motif_example():
    rng = np.random.default_rng(42)
    x = rng.normal(0, 1, 70)
    pat = np.array([0, 3, -3, 2, -2, 4, -4, 1.0])
    x[9:17] = pat
    x[49:57] = pat
    out = get_split_indices(MotifRepresentatives("v", 8, 1), numeric_series(x))
    assert out.tolist() == [0, 9, 17, 49, 57, 70]
    d, pair = best_pair_oracle(x, 8, math.ceil(8 / 2))
    assert pair == (9, 49)


def test_motif_matches_allpairs_oracle_on_random_series():
    rng = np.random.default_rng(77)
    for _ in range(8):
        n = int(rng.integers(24, 60))
        m = int(rng.integers(3, 7))
        x = rng.normal(0, 1, n)
        inst = motif_instances(x, m, 1)
        d, pair = best_pair_oracle(x, m, math.ceil(m / 2))
        if pair is None:
            assert inst == []
        else:
            assert [a for a, _ in inst] == sorted(pair)


def test_motif_too_short_degrades():
    out = get_split_indices(MotifRepresentatives("v", 8, 1), numeric_series(np.arange(10.0)))
    assert out.tolist() == [0, 10]
    assert out.warnings


def test_motif_constant_series_contractual():
    out = get_split_indices(MotifRepresentatives("v", 4, 1), numeric_series(np.full(20, 2.5)))
    idx = out.indices
    assert idx[0] == 0 and idx[-1] == 20 and np.all(np.diff(idx) > 0)


def test_motif_window_with_missing_excluded():
    rng = np.random.default_rng(5)
    x = rng.normal(0, 1, 40)
    pat = np.array([1.0, 5.0, -5.0, 2.0])
    x[3:7] = pat
    x[30:34] = pat
    x[4] = np.nan  # first instance invalidated: best pair must avoid it
    inst = motif_instances(x, 4, 1)
    assert all(not np.isnan(x[a:b]).any() for a, b in inst)


def test_pattern_exact_match():
    rng = np.random.default_rng(1)
    x = rng.normal(0, 1, 40)
    pat = (0.0, 2.0, -2.0, 1.0)
    x[12:16] = pat
    out = get_split_indices(PatternMatches("v", pat, 0.01), numeric_series(x))
    assert 12 in out.interior.tolist() and 16 in out.interior.tolist()


def test_pattern_no_match_below_min_distance():
    x = np.arange(30, dtype=float)
    out = get_split_indices(PatternMatches("v", (0.0, 5.0, 0.0, 5.0), 1e-6), numeric_series(x))
    assert out.tolist() == [0, 30]


def test_pattern_two_disjoint_occurrences():
    rng = np.random.default_rng(2)
    x = rng.normal(0, 1, 60)
    pat = np.array([0, 3, -3, 2, -2, 4, -4, 1.0])
    x[5:13] = pat
    x[30:38] = pat
    out = get_split_indices(PatternMatches("v", tuple(pat), 0.01), numeric_series(x))
    assert out.tolist() == [0, 5, 13, 30, 38, 60]
    # brute-force sliding scan confirms exactly those two zero-distance sites
    hits = [j for j in range(53) if znorm_dist(x[j : j + 8], pat) <= 0.01]
    assert hits == [5, 30]


def test_pattern_matches_brute_force_distances():
    rng = np.random.default_rng(3)
    x = rng.normal(0, 1, 50)
    pat = tuple(rng.normal(0, 1, 6))
    spec = PatternMatches("v", pat, 1.0)
    d = spec.match_distances(numeric_series(x).view(1, 50))
    for j in range(45):
        assert d[j] == np.float64(znorm_dist(x[j : j + 6], pat)) or abs(d[j] - znorm_dist(x[j : j + 6], pat)) < 1e-8


def test_pattern_overlapping_candidates_greedy_best_first():
    # identical pattern region: overlapping candidate windows must not overlap in output
    x = np.concatenate([np.tile([0.0, 4.0], 10), [9.0] * 4])
    pat = (0.0, 4.0, 0.0, 4.0)
    out = get_split_indices(PatternMatches("v", pat, 0.01), numeric_series(x))
    inst = [(s, s + 4) for s in range(0, 17, 2) if znorm_dist(x[s : s + 4], pat) <= 0.01]
    accepted = []
    for s, e in inst:
        if all(e2 <= s or s2 >= e for s2, e2 in accepted):
            accepted.append((s, e))
    expected = sorted({b for s, e in accepted for b in (s, e)})
    assert out.interior.tolist() == [b for b in expected if 0 < b < len(x)]
