"""Growing Rings: expand a local subgraph toward the global graph.

Starting from an initial node set H_0, each ring adds the targets of the
out-edges leaving the current set; ring k >= 1 is always the global-graph
induced subgraph on its node set.  The full strategy adds the whole frontier;
the top-percent strategy ranks the frontier by PageRank (computed on the
current ring extended with the frontier) and keeps only the best slice.

Per ring we record Kendall's tau between the PageRank of the ring and the
global PageRank restricted to the ring's nodes, which is the convergence
signal of the local ranking toward the global one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import BrowseGraph, induced_subgraph, out_frontier
from .pagerank import DEFAULT_ALPHA, pagerank, scores_by_url
from .rankcmp import kendall_tau_b

__all__ = ["RingSequence", "expand_full", "expand_top_percent", "run_rings",
           "make_initial_sets", "DEFAULT_MAX_RINGS", "SRB_SIZE_TOLERANCE"]

DEFAULT_MAX_RINGS = 10
SRB_SIZE_TOLERANCE = 0.094
SAMPLE_RETRY_BUDGET = 100


@dataclass
class RingSequence:
    """One expansion run: node sets, per-ring sizes and tau values."""

    rings: list[frozenset[int]]
    taus: list[float]
    strategy: str
    ring_sizes: list[tuple[int, int]]  # (nodes, edges) per ring
    saturated: bool

    def final_tau(self) -> float:
        return self.taus[-1]


def expand_full(G: BrowseGraph, h_nodes: Iterable[int]) -> set[int]:
    """Next ring node set: the current set plus its whole out-frontier."""
    nodes = set(int(v) for v in h_nodes)
    return nodes | out_frontier(G, nodes)


def expand_top_percent(
    G: BrowseGraph,
    h_nodes: Iterable[int],
    percent: float,
    alpha: float = DEFAULT_ALPHA,
) -> set[int]:
    """Next ring node set keeping only the top slice of the frontier.

    The frontier Y is ranked by PageRank computed on the G-induced subgraph
    over H union Y; ceil(|Y| * percent / 100) members with the highest score
    survive.  Ties at the cutoff break by URL so the result is reproducible.
    percent=100 keeps everything and matches :func:`expand_full` exactly.
    """
    if not 0.0 < percent <= 100.0:
        raise ValueError("percent must lie in (0, 100]")
    nodes = set(int(v) for v in h_nodes)
    frontier = out_frontier(G, nodes)
    if not frontier:
        return nodes
    extended = induced_subgraph(G, sorted(nodes | frontier))
    rv = pagerank(extended, alpha)
    scores = scores_by_url(extended, rv)
    keep = math.ceil(len(frontier) * percent / 100.0)
    ranked = sorted(frontier, key=lambda v: (-scores[G.url(v)], G.url(v)))
    return nodes | set(ranked[:keep])


def _ring_tau(ring_scores: Mapping[str, float],
              global_scores: Mapping[str, float]) -> float:
    """Tau restricted to the ring's URLs; 0.0 for degenerate (<2 node) rings."""
    common = sorted(ring_scores.keys() & global_scores.keys())
    if len(common) < 2:
        return 0.0
    return kendall_tau_b([ring_scores[u] for u in common],
                         [global_scores[u] for u in common])


def run_rings(
    G: BrowseGraph,
    h0: BrowseGraph | Iterable[int],
    strategy: str = "full",
    alpha: float = DEFAULT_ALPHA,
    max_rings: int = DEFAULT_MAX_RINGS,
    global_scores: Mapping[str, float] | None = None,
) -> RingSequence:
    """Expand from H_0 and track local-vs-global PageRank agreement.

    *h0* is either a node-id set of G (ring 0 is then the induced subgraph)
    or a BrowseGraph whose URLs all appear in G; in that case ring 0 keeps
    the graph's own (possibly non-induced) edges, as a referrer subgraph
    would.  *strategy* is ``"full"`` or ``"top:P"`` with percentage P.
    Expansion stops at saturation (the node set stops changing) or after
    *max_rings* expansions.
    """
    if strategy == "full":
        percent = None
    elif strategy.startswith("top:"):
        percent = float(strategy.split(":", 1)[1])
        if not 0.0 < percent <= 100.0:
            raise ValueError("top-percent strategy needs a value in (0, 100]")
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    if isinstance(h0, BrowseGraph):
        ring_graph: BrowseGraph | None = h0
        nodes = set()
        for url in h0.urls:
            gid = G.node_id(url)
            if gid is None:
                raise ValueError(f"H0 URL {url!r} does not appear in the global graph")
            nodes.add(gid)
    else:
        nodes = set(int(v) for v in h0)
        ring_graph = None
    if not nodes:
        raise ValueError("H0 must be non-empty")

    if global_scores is None:
        global_scores = scores_by_url(G, pagerank(G, alpha))

    rings: list[frozenset[int]] = []
    taus: list[float] = []
    sizes: list[tuple[int, int]] = []
    saturated = False
    for _ in range(max_rings + 1):
        graph = ring_graph if ring_graph is not None else induced_subgraph(G, sorted(nodes))
        ring_graph = None  # rings >= 1 are induced
        rings.append(frozenset(nodes))
        sizes.append((graph.node_count, graph.edge_count))
        local = scores_by_url(graph, pagerank(graph, alpha))
        taus.append(_ring_tau(local, global_scores))
        grown = expand_full(G, nodes) if percent is None else \
            expand_top_percent(G, nodes, percent, alpha)
        if grown == nodes:
            saturated = True
            break
        nodes = grown
    strategy_name = "full" if percent is None else f"top:{percent:g}"
    return RingSequence(rings, taus, strategy_name, sizes, saturated)


# ---- initial-set regimes -------------------------------------------------------


def _undirected_bfs_levels(g: BrowseGraph, root: int) -> Iterable[list[int]]:
    """BFS levels from *root* treating edges as undirected."""
    seen = np.zeros(g.node_count, dtype=bool)
    seen[root] = True
    level = [root]
    while level:
        yield level
        nxt: list[int] = []
        for u in level:
            for arr in (g.out_edges(u)[0], g.in_edges(u)[0]):
                for v in arr.tolist():
                    if not seen[v]:
                        seen[v] = True
                        nxt.append(v)
        level = nxt


def _bfs_sample(
    g: BrowseGraph,
    target: int,
    rng: np.random.Generator,
    tolerance: float,
    budget: int = SAMPLE_RETRY_BUDGET,
) -> set[int]:
    """Sample about *target* nodes by BFS from random roots.

    The last BFS level is truncated at random so the sample hits *target*
    exactly whenever the reached component is large enough; otherwise the
    whole component is accepted if within ``target*(1 +/- tolerance)``
    (with tolerance=0 only exact hits pass).  Raises after *budget* failed
    attempts, reporting the sizes it could reach.
    """
    if target < 1:
        raise ValueError("target size must be >= 1")
    if g.node_count == 0:
        raise ValueError("cannot sample from an empty graph")
    lower = target * (1.0 - tolerance)
    achieved: list[int] = []
    for _ in range(budget):
        root = int(rng.integers(g.node_count))
        acc: list[int] = []
        for level in _undirected_bfs_levels(g, root):
            if len(acc) + len(level) >= target:
                need = target - len(acc)
                level = list(level)
                rng.shuffle(level)
                acc.extend(level[:need])
                return set(acc)
            acc.extend(level)
        if len(acc) >= lower:
            return set(acc)
        achieved.append(len(acc))
    raise ValueError(
        f"BFS sampling could not reach a sample of size ~{target} "
        f"in {budget} attempts (component sizes reached: {sorted(set(achieved))})")


def make_initial_sets(
    G: BrowseGraph,
    referrer_graphs: Sequence[tuple[str, BrowseGraph]],
    regime: str,
    target_size: int | None = None,
    rng: np.random.Generator | None = None,
) -> list[tuple[str, set[int]]]:
    """Initial node sets (in G's id space) for the three expansion regimes.

    RB uses each referrer subgraph's nodes as-is.  SRB re-samples every
    referrer subgraph down to *target_size* by random-rooted BFS (sizes land
    within +/-9.4%).  R draws BFS samples of G itself, one per referrer
    subgraph, pruned to match that subgraph's size exactly.
    """
    rng = np.random.default_rng() if rng is None else rng

    def to_g_ids(rg: BrowseGraph, ids: Iterable[int]) -> set[int]:
        out = set()
        for v in ids:
            gid = G.node_id(rg.url(v))
            if gid is None:
                raise ValueError(
                    f"referrer URL {rg.url(v)!r} missing from the global graph")
            out.add(gid)
        return out

    results: list[tuple[str, set[int]]] = []
    if regime == "RB":
        for name, rg in referrer_graphs:
            results.append((name, to_g_ids(rg, range(rg.node_count))))
    elif regime == "SRB":
        if target_size is None:
            raise ValueError("SRB regime needs target_size")
        for name, rg in referrer_graphs:
            sample = _bfs_sample(rg, target_size, rng, SRB_SIZE_TOLERANCE)
            results.append((name, to_g_ids(rg, sample)))
    elif regime == "R":
        for name, rg in referrer_graphs:
            sample = _bfs_sample(G, rg.node_count, rng, 0.0)
            results.append((name, sample))
    else:
        raise ValueError(f"unknown regime {regime!r} (expected RB, SRB or R)")
    return results
