"""Rank agreement between two score vectors on their common node set.

Kendall's tau is the tie-corrected tau-b, computed with Knight's
O(m log m) method: sort by the first variable, then count discordant pairs
as merge-sort inversions of the second.  Spearman's rho is the Pearson
correlation of average ranks.  Both are defined as 0.0 when one side has no
rank variation at all, so callers never see NaN.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import BrowseGraph
from .pagerank import RankVector, scores_by_url

__all__ = ["RankAgreement", "kendall_tau_b", "spearman_rho",
           "rank_agreement", "compare_ranked_graphs", "tau_matrix"]


@dataclass(frozen=True)
class RankAgreement:
    kendall_tau: float
    spearman_rho: float
    common_nodes: int


def _merge_count(values: list[float]) -> int:
    """Number of inversions (strictly decreasing pairs) in *values*."""
    n = len(values)
    if n < 2:
        return 0
    buf = list(values)
    tmp = [0.0] * n
    inversions = 0
    width = 1
    while width < n:
        for left in range(0, n - width, 2 * width):
            mid = left + width
            right = min(mid + width, n)
            i, j, k = left, mid, left
            while i < mid and j < right:
                if buf[i] <= buf[j]:
                    tmp[k] = buf[i]
                    i += 1
                else:
                    tmp[k] = buf[j]
                    inversions += mid - i
                    j += 1
                k += 1
            while i < mid:
                tmp[k] = buf[i]
                i += 1
                k += 1
            while j < right:
                tmp[k] = buf[j]
                j += 1
                k += 1
            buf[left:right] = tmp[left:right]
        width *= 2
    return inversions


def _tie_term(sorted_vals: Sequence[float]) -> int:
    """Sum of t*(t-1)/2 over runs of equal values in a sorted sequence."""
    total = 0
    run = 1
    for a, b in zip(sorted_vals, sorted_vals[1:]):
        if a == b:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    total += run * (run - 1) // 2
    return total


def kendall_tau_b(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected Kendall correlation of two paired score sequences.

    Ties are exact float equality.  Returns 0.0 when either side is constant
    (the tie correction would otherwise divide by zero).
    """
    n = len(x)
    if n != len(y):
        raise ValueError("paired sequences must have equal length")
    if n < 2:
        raise ValueError("need at least 2 pairs")
    order = sorted(range(n), key=lambda i: (x[i], y[i]))
    xs = [x[i] for i in order]
    ys = [y[i] for i in order]

    n0 = n * (n - 1) // 2
    ties_x = _tie_term(xs)
    joint = _tie_term(list(zip(xs, ys)))  # runs of equal (x, y) pairs
    ties_y = _tie_term(sorted(ys))
    swaps = _merge_count(ys)

    numer = n0 - ties_x - ties_y + joint - 2 * swaps
    denom_sq = (n0 - ties_x) * (n0 - ties_y)
    if denom_sq <= 0:
        return 0.0
    return numer / float(np.sqrt(denom_sq))


def _average_ranks(v: np.ndarray) -> np.ndarray:
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.size, dtype=float)
    sv = v[order]
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks; 0.0 when a side is constant."""
    if len(x) != len(y):
        raise ValueError("paired sequences must have equal length")
    if len(x) < 2:
        raise ValueError("need at least 2 pairs")
    rx = _average_ranks(np.asarray(x, dtype=float))
    ry = _average_ranks(np.asarray(y, dtype=float))
    rx -= rx.mean()
    ry -= ry.mean()
    vx = float(rx @ rx)
    vy = float(ry @ ry)
    if vx == 0.0 or vy == 0.0:
        return 0.0
    return float(rx @ ry) / float(np.sqrt(vx * vy))


def rank_agreement(a: Mapping[str, float], b: Mapping[str, float]) -> RankAgreement:
    """Tau-b and Spearman rho on the keys common to both score maps.

    Raises ValueError (reporting the intersection size) when fewer than two
    keys are shared.
    """
    common = sorted(a.keys() & b.keys())
    if len(common) < 2:
        raise ValueError(
            f"need >= 2 common nodes to compare rankings, got {len(common)}")
    xs = [a[k] for k in common]
    ys = [b[k] for k in common]
    return RankAgreement(kendall_tau_b(xs, ys), spearman_rho(xs, ys), len(common))


def compare_ranked_graphs(
    g_a: BrowseGraph, rv_a: RankVector, g_b: BrowseGraph, rv_b: RankVector
) -> RankAgreement:
    """Rank agreement of two (graph, PageRank) pairs, intersected by URL."""
    return rank_agreement(scores_by_url(g_a, rv_a), scores_by_url(g_b, rv_b))


def tau_matrix(named_scores: Sequence[tuple[str, Mapping[str, float]]]):
    """Pairwise Kendall tau over a list of (name, url->score) entries.

    Returns (names, matrix) with the symmetric tau values; the diagonal is
    the self-comparison and equals 1.0.
    """
    names = [name for name, _ in named_scores]
    k = len(names)
    mat = np.ones((k, k))
    for i in range(k):
        for j in range(i, k):
            tau = rank_agreement(named_scores[i][1], named_scores[j][1]).kendall_tau
            mat[i, j] = mat[j, i] = tau
    return names, mat
