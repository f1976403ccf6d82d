"""Structural graph metrics: 62 features in six categories.

Categories and their sizes:

* S (9)  size and connectivity: node/edge counts, density, reciprocity,
  weak component count, weak-GCC fraction, strong component count,
  giant-SCC fraction, self-loop count.
* A (8)  degree assortativity over edges, for the four (source degree mode,
  target degree mode) pairings (in,in) (in,out) (out,in) (out,out), plain
  and transition-count weighted.
* D (15) five order statistics {mean, median, std, min, max} of the
  in-degree, out-degree and total-degree distributions.
* W (15) the same statistics of in/out/total node strength (weighted degree).
* P (10) statistics of the local PageRank distribution: the five above plus
  skewness, excess kurtosis, Gini coefficient, Shannon entropy and the score
  mass held by the top 1% of nodes.
* C (5)  five order statistics of harmonic closeness (out-direction hop
  distances), over a seeded uniform sample of source nodes.

Undefined statistics (for example the spread of a single value) default to
0.0, so every feature is finite on any non-empty graph.  The name list and
order are frozen; extraction is bit-reproducible given the same sample seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BrowseGraph, density, weak_components
from .pagerank import RankVector

__all__ = ["FeatureVector", "FEATURE_NAMES", "FEATURE_CATEGORIES",
           "CATEGORY_COUNTS", "extract_features", "assortativity",
           "harmonic_closeness", "strongly_connected_components",
           "DEFAULT_CLOSENESS_SAMPLE"]

DEFAULT_CLOSENESS_SAMPLE = 256

_STAT_NAMES = ("mean", "median", "std", "min", "max")

_S_NAMES = ("s_nodes", "s_edges", "s_density", "s_reciprocity",
            "s_weak_components", "s_gcc_fraction",
            "s_strong_components", "s_gscc_fraction", "s_self_loops")
_A_NAMES = tuple(f"a_{sm}_{tm}{suffix}"
                 for suffix in ("", "_w")
                 for sm, tm in (("in", "in"), ("in", "out"),
                                ("out", "in"), ("out", "out")))
_D_NAMES = tuple(f"d_{kind}_{stat}" for kind in ("in", "out", "total")
                 for stat in _STAT_NAMES)
_W_NAMES = tuple(f"w_{kind}_{stat}" for kind in ("in", "out", "total")
                 for stat in _STAT_NAMES)
_P_NAMES = ("p_mean", "p_median", "p_std", "p_min", "p_max",
            "p_skewness", "p_kurtosis", "p_gini", "p_entropy",
            "p_top1pct_mass")
_C_NAMES = tuple(f"c_{stat}" for stat in _STAT_NAMES)

FEATURE_NAMES: tuple[str, ...] = _S_NAMES + _A_NAMES + _D_NAMES + _W_NAMES + _P_NAMES + _C_NAMES
FEATURE_CATEGORIES: tuple[str, ...] = (
    ("S",) * len(_S_NAMES) + ("A",) * len(_A_NAMES) + ("D",) * len(_D_NAMES)
    + ("W",) * len(_W_NAMES) + ("P",) * len(_P_NAMES) + ("C",) * len(_C_NAMES)
)
CATEGORY_COUNTS = {"S": 9, "A": 8, "D": 15, "W": 15, "P": 10, "C": 5}
assert len(FEATURE_NAMES) == 62
assert {c: FEATURE_CATEGORIES.count(c) for c in "SADWPC"} == CATEGORY_COUNTS


@dataclass(frozen=True)
class FeatureVector:
    """62 named structural metrics of one graph, in frozen order."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (62,):
            raise ValueError("feature vector must have exactly 62 entries")

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(FEATURE_NAMES, self.values)}

    def __getitem__(self, name: str) -> float:
        return float(self.values[FEATURE_NAMES.index(name)])


def _five_stats(v: np.ndarray) -> list[float]:
    if v.size == 0:
        return [0.0] * 5
    return [float(v.mean()), float(np.median(v)), float(v.std()),
            float(v.min()), float(v.max())]


def _degrees(g: BrowseGraph) -> dict[str, np.ndarray]:
    n = g.node_count
    d_in = np.bincount(g.dst, minlength=n).astype(float)
    d_out = np.bincount(g.src, minlength=n).astype(float)
    return {"in": d_in, "out": d_out, "total": d_in + d_out}


def assortativity(g: BrowseGraph, source_mode: str, target_mode: str,
                  weighted: bool = False) -> float:
    """Degree correlation across edges.

    Pearson correlation, over the edge list, between the *source_mode* degree
    of each edge's source and the *target_mode* degree of its target; the
    weighted variant counts each edge with multiplicity equal to its weight.
    Returns 0.0 when either marginal is constant.
    """
    if g.edge_count == 0:
        raise ValueError("assortativity needs at least one edge")
    degs = _degrees(g)
    if source_mode not in degs or target_mode not in degs:
        raise ValueError("degree mode must be 'in', 'out' or 'total'")
    x = degs[source_mode][g.src]
    y = degs[target_mode][g.dst]
    w = g.weight.astype(float) if weighted else np.ones(g.edge_count)
    wsum = w.sum()
    mx = float((w * x).sum() / wsum)
    my = float((w * y).sum() / wsum)
    cov = float((w * (x - mx) * (y - my)).sum() / wsum)
    vx = float((w * (x - mx) ** 2).sum() / wsum)
    vy = float((w * (y - my) ** 2).sum() / wsum)
    if vx <= 0.0 or vy <= 0.0:
        return 0.0
    return cov / float(np.sqrt(vx * vy))


def strongly_connected_components(g: BrowseGraph) -> list[set[int]]:
    """Tarjan's SCC algorithm, iterative to survive deep graphs."""
    n = g.node_count
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    stack: list[int] = []
    comps: list[set[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            v, ei = work.pop()
            if ei == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            dsts = g.out_edges(v)[0]
            advanced = False
            while ei < dsts.size:
                w = int(dsts[ei])
                ei += 1
                if index[w] == -1:
                    work.append((v, ei))
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            if low[v] == index[v]:
                comp: set[int] = set()
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.add(w)
                    if w == v:
                        break
                comps.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def _bfs_out_distances(g: BrowseGraph, source: int) -> np.ndarray:
    """Hop distances along out-edges; -1 where unreachable."""
    dist = np.full(g.node_count, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    d = 0
    ptr, dsts = g._out_ptr, g.dst
    while frontier.size:
        starts = ptr[frontier]
        counts = ptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        flat = np.repeat(starts + counts - np.cumsum(counts), counts) \
            + np.arange(total)
        nbrs = dsts[flat]
        fresh = nbrs[dist[nbrs] < 0]
        if fresh.size == 0:
            break
        d += 1
        dist[fresh] = d
        frontier = np.unique(fresh)
    return dist


def harmonic_closeness(g: BrowseGraph, source: int) -> float:
    """Normalized harmonic closeness: mean of 1/hops to every other node.

    Unreachable nodes contribute 0; a 1-node graph scores 0.
    """
    n = g.node_count
    if n <= 1:
        return 0.0
    dist = _bfs_out_distances(g, source)
    reached = dist > 0
    return float((1.0 / dist[reached]).sum() / (n - 1))


def _pagerank_stats(scores: np.ndarray) -> list[float]:
    base = _five_stats(scores)
    std = base[2]
    n = scores.size
    if std > 0.0:
        centered = scores - scores.mean()
        skew = float((centered ** 3).mean() / std ** 3)
        kurt = float((centered ** 4).mean() / std ** 4 - 3.0)
    else:
        skew = kurt = 0.0
    total = float(scores.sum())
    srt = np.sort(scores)
    gini = float(((2.0 * np.arange(1, n + 1) - n - 1) * srt).sum()
                 / (n * total)) if total > 0 else 0.0
    p = scores / total if total > 0 else np.full(n, 1.0 / n)
    entropy = float(-(p * np.log(p)).sum())
    top_k = max(1, int(np.ceil(0.01 * n)))
    top_mass = float(srt[-top_k:].sum() / total) if total > 0 else 0.0
    return base + [skew, kurt, gini, entropy, top_mass]


def extract_features(
    g: BrowseGraph,
    local_pr: RankVector,
    closeness_sample: int = DEFAULT_CLOSENESS_SAMPLE,
    rng: np.random.Generator | None = None,
) -> FeatureVector:
    """Compute the frozen 62-feature vector of *g*.

    *local_pr* must be the PageRank of *g* itself.  Closeness is averaged
    over ``min(closeness_sample, n)`` sources; below the graph size the
    sample is drawn from *rng* (required then), at or above it the
    enumeration is exhaustive and deterministic.
    """
    n = g.node_count
    if n == 0:
        raise ValueError("cannot extract features of an empty graph")
    if local_pr.scores.shape != (n,):
        raise ValueError("rank vector does not match graph size")

    values: list[float] = []

    # S: size and connectivity
    weak = weak_components(g)
    strong = strongly_connected_components(g)
    self_loops = int((g.src == g.dst).sum())
    values += [
        float(n),
        float(g.edge_count),
        density(n, g.edge_count),
        _reciprocity(g),
        float(len(weak)),
        max(len(c) for c in weak) / n,
        float(len(strong)),
        max(len(c) for c in strong) / n,
        float(self_loops),
    ]

    # A: assortativity pairings, plain then weighted
    pairings = (("in", "in"), ("in", "out"), ("out", "in"), ("out", "out"))
    for weighted in (False, True):
        for sm, tm in pairings:
            values.append(
                assortativity(g, sm, tm, weighted) if g.edge_count else 0.0)

    # D and W: degree and strength statistics
    degs = _degrees(g)
    for kind in ("in", "out", "total"):
        values += _five_stats(degs[kind])
    strengths = {"in": g.in_strength, "out": g.out_strength,
                 "total": g.in_strength + g.out_strength}
    for kind in ("in", "out", "total"):
        values += _five_stats(strengths[kind].astype(float))

    # P: local PageRank distribution
    values += _pagerank_stats(local_pr.scores)

    # C: harmonic closeness over a node sample
    if closeness_sample >= n:
        sample = np.arange(n)
    else:
        if rng is None:
            raise ValueError("closeness sampling below graph size needs an rng")
        sample = np.sort(rng.choice(n, size=closeness_sample, replace=False))
    closeness = np.array([harmonic_closeness(g, int(s)) for s in sample])
    values += _five_stats(closeness)

    return FeatureVector(np.array(values))


def _reciprocity(g: BrowseGraph) -> float:
    nonloop = g.src != g.dst
    total = int(nonloop.sum())
    if total == 0:
        return 0.0
    keys = set(zip(g.src[nonloop].tolist(), g.dst[nonloop].tolist()))
    return sum(1 for s, d in keys if (d, s) in keys) / total
