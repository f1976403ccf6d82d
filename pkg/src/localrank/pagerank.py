"""Weighted PageRank by power iteration with uniform teleportation.

The iteration on the weight-normalized transition matrix P is

    p' = (1 - alpha) / n + alpha * (P^T p + dangling_mass / n)

where the rank mass sitting on dangling nodes (zero out-strength) is
redistributed uniformly, which keeps the vector a probability distribution at
every step.  Iteration stops when the L1 change drops to `tol` or after
`max_iter` sweeps; a run that hits the cap is returned with its residual
rather than raising.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import BrowseGraph

__all__ = ["RankVector", "pagerank", "transition_prob", "scores_by_url",
           "save_ranks_tsv", "load_ranks_tsv"]

DEFAULT_ALPHA = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


@dataclass
class RankVector:
    """PageRank scores for one graph, indexed by node id."""

    scores: np.ndarray
    alpha: float
    iterations_used: int
    residual: float
    tol: float = DEFAULT_TOL
    residuals: list[float] = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.residual <= self.tol


def pagerank(
    g: BrowseGraph,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RankVector:
    """Power-iterate weighted PageRank on *g*.

    Raises ValueError on an empty graph or parameters out of range; a run
    that does not reach *tol* within *max_iter* is returned with its final
    residual (check ``result.converged``).
    """
    n = g.node_count
    if n == 0:
        raise ValueError("pagerank of an empty graph is undefined")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if tol <= 0.0:
        raise ValueError("tol must be positive")

    w_norm = np.zeros(g.edge_count)
    if g.edge_count:
        w_norm = g.weight / g.out_strength[g.src]
    dangling = g.out_strength == 0.0

    p = np.full(n, 1.0 / n)
    teleport = (1.0 - alpha) / n
    residuals: list[float] = []
    iterations = 0
    residual = float("inf")
    for iterations in range(1, max_iter + 1):
        flow = np.bincount(g.dst, weights=p[g.src] * w_norm, minlength=n) \
            if g.edge_count else np.zeros(n)
        dangling_mass = float(p[dangling].sum())
        p_next = teleport + alpha * (flow + dangling_mass / n)
        residual = float(np.abs(p_next - p).sum())
        residuals.append(residual)
        p = p_next
        if residual <= tol:
            break
    return RankVector(p, alpha, iterations, residual, tol, residuals)


def transition_prob(g: BrowseGraph, u: int, v: int) -> float:
    """Probability of stepping u -> v on the weight-normalized graph.

    Zero when the edge is absent or u is dangling; unknown ids raise.
    """
    s = g.out_strength[u] if g.has_node(u) else None
    if s is None:
        raise ValueError(f"unknown node id {u!r}")
    if not g.has_node(v):
        raise ValueError(f"unknown node id {v!r}")
    if s == 0.0:
        return 0.0
    return g.edge_weight(u, v) / s


def scores_by_url(g: BrowseGraph, rv: RankVector) -> dict[str, float]:
    """Map each node URL to its score."""
    return {url: float(score) for url, score in zip(g.urls, rv.scores)}


def save_ranks_tsv(g: BrowseGraph, rv: RankVector, path) -> None:
    """Write `url<TAB>score` sorted by descending score (URL breaks ties)."""
    rows = sorted(zip(g.urls, rv.scores), key=lambda kv: (-kv[1], kv[0]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for url, score in rows:
            fh.write(f"{url}\t{float(score)!r}\n")


def load_ranks_tsv(path) -> dict[str, float]:
    out: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            url, score = line.split("\t")
            out[url] = float(score)
    return out
