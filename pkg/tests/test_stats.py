import math
import random

import pytest

from sieve.stats import PERCENTILES, histogram, summarize, value_counts


def brute_force_percentile(sorted_values, p):
    """Linear interpolation between closest ranks, written independently."""
    n = len(sorted_values)
    if n == 1:
        return float(sorted_values[0])
    rank = (p / 100) * (n - 1)
    lo = math.floor(rank)
    hi = math.ceil(rank)
    frac = rank - lo
    return sorted_values[lo] * (1 - frac) + sorted_values[hi] * frac


def test_summary_hand_computed():
    out = summarize([1, 2, 3, 4, 5])
    assert out["count"] == 5
    assert out["mean"] == 3.0
    assert out["percentiles"]["50"] == 3.0
    assert out["min"] == 1.0 and out["max"] == 5.0


def test_p50_linear_interpolation():
    assert summarize([1, 2, 3, 4])["percentiles"]["50"] == 2.5


def test_empty_corpus_null_moments():
    out = summarize([])
    assert out["count"] == 0
    assert out["mean"] is None and out["std"] is None
    assert all(v is None for v in out["percentiles"].values())


def test_std_is_sample_std():
    out = summarize([1, 2, 3])
    assert out["std"] == pytest.approx(1.0)
    assert summarize([7])["std"] == 0.0


def test_percentiles_match_brute_force():
    rng = random.Random(99)
    values = [rng.randrange(0, 5000) for _ in range(2000)]
    out = summarize(values)
    ordered = sorted(values)
    for p in PERCENTILES:
        assert out["percentiles"][str(p)] == pytest.approx(
            brute_force_percentile(ordered, p), abs=1e-9
        )


def test_value_counts_exact():
    rows = value_counts([3, 3, 4, 5, 3])
    assert [(r["value"], r["count"]) for r in rows] == [(3, 3), (4, 1), (5, 1)]
    assert rows[0]["percentage"] == pytest.approx(60.0)
    assert rows[-1]["cumulative_percentage"] == pytest.approx(100.0)


def test_histogram_shape():
    rows = histogram([0, 1, 2, 3, 4, 5, 6, 7, 8, 9], bins=5)
    assert len(rows) == 5
    assert sum(r["frequency"] for r in rows) == 10
    assert rows[-1]["cumulative_frequency"] == 10
    assert rows[-1]["cumulative_proportion"] == pytest.approx(100.0)
    assert rows[0]["bin_low"] == 0.0 and rows[-1]["bin_high"] == 9.0
    assert histogram([], bins=3) == []
