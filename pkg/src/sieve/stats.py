"""Descriptive corpus statistics: word counts and median word lengths.

Percentiles use linear interpolation between closest ranks; the standard
deviation is the sample estimate (ddof=1), matching the descriptive-table
convention the reports follow.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

PERCENTILES = (10, 30, 50, 70, 90, 95, 99)


def summarize(values) -> dict:
    """count/mean/std/min/max plus the standard percentile set; null moments
    when the input is empty."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        return {
            "count": 0,
            "mean": None,
            "std": None,
            "min": None,
            "max": None,
            "percentiles": {str(p): None for p in PERCENTILES},
        }
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return {
        "count": int(arr.size),
        "mean": float(np.mean(arr)),
        "std": std,
        "min": float(np.min(arr)),
        "max": float(np.max(arr)),
        "percentiles": {str(p): float(np.percentile(arr, p)) for p in PERCENTILES},
    }


def value_counts(values) -> list[dict]:
    """Exact tallies in ascending value order with percentage and cumulative
    percentage columns."""
    counts = Counter(values)
    total = sum(counts.values())
    rows = []
    cumulative = 0
    for value in sorted(counts):
        count = counts[value]
        cumulative += count
        rows.append(
            {
                "value": value,
                "count": count,
                "percentage": 100.0 * count / total,
                "cumulative_percentage": 100.0 * cumulative / total,
            }
        )
    return rows


def histogram(values, bins: int) -> list[dict]:
    """Equal-width histogram rows with frequency, cumulative frequency,
    proportion, and cumulative proportion."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0 or bins < 1:
        return []
    counts, edges = np.histogram(arr, bins=bins)
    total = int(arr.size)
    rows = []
    cumulative = 0
    for i, count in enumerate(counts):
        cumulative += int(count)
        rows.append(
            {
                "bin_low": float(edges[i]),
                "bin_high": float(edges[i + 1]),
                "frequency": int(count),
                "cumulative_frequency": cumulative,
                "proportion": 100.0 * int(count) / total,
                "cumulative_proportion": 100.0 * cumulative / total,
            }
        )
    return rows
