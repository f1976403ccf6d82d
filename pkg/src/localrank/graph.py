"""Weighted directed browse graph.

Nodes are web pages identified by URL strings; internally they carry dense
integer ids 0..N-1 assigned in first-seen order.  Edge weights count how many
times a transition between two pages was observed, so they are positive
integers and repeated transitions accumulate instead of duplicating the edge.
Self-loops (page reloads) are legal edges.

Graphs are immutable after construction and safe to share between workers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "BrowseGraph",
    "GraphStats",
    "build_graph",
    "from_weighted_edges",
    "density",
    "stats",
    "weak_components",
    "induced_subgraph",
    "out_frontier",
    "load_graph_tsv",
    "save_graph_tsv",
]


@dataclass(frozen=True)
class GraphStats:
    """Size and wiring summary of one graph."""

    nodes: int
    edges: int
    density: float
    gcc_fraction: float
    reciprocity: float


class BrowseGraph:
    """Immutable weighted digraph with URL symbol table and CSR adjacency.

    Edges are kept sorted by (source id, target id) so that the out-adjacency
    of a node is a contiguous, target-sorted slice; the in-adjacency is a
    second index sorted by (target id, source id).
    """

    __slots__ = (
        "urls",
        "_url_to_id",
        "src",
        "dst",
        "weight",
        "_out_ptr",
        "_in_ptr",
        "_in_src",
        "_in_wt",
        "out_strength",
        "in_strength",
    )

    def __init__(self, urls: Sequence[str], src, dst, weight):
        n = len(urls)
        self.urls: tuple[str, ...] = tuple(urls)
        self._url_to_id = {u: i for i, u in enumerate(self.urls)}
        if len(self._url_to_id) != n:
            raise ValueError("duplicate URL in node table")

        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.int64)
        if not (src.shape == dst.shape == weight.shape):
            raise ValueError("edge arrays must have equal length")
        if src.size:
            if src.min(initial=0) < 0 or (n and src.max(initial=-1) >= n):
                raise ValueError("edge source id out of range")
            if dst.min(initial=0) < 0 or (n and dst.max(initial=-1) >= n):
                raise ValueError("edge target id out of range")
            if weight.min(initial=1) < 1:
                raise ValueError("edge weights must be >= 1")

        # canonical edge order: (src, dst)
        order = np.lexsort((dst, src))
        src, dst, weight = src[order], dst[order], weight[order]
        if src.size > 1:
            same = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if same.any():
                raise ValueError("duplicate (source, target) edge")

        self.src = src
        self.dst = dst
        self.weight = weight
        self._out_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self._out_ptr[1:])

        in_order = np.lexsort((src, dst))
        self._in_src = src[in_order]
        self._in_wt = weight[in_order]
        self._in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=self._in_ptr[1:])

        self.out_strength = np.bincount(src, weights=weight, minlength=n)
        self.in_strength = np.bincount(dst, weights=weight, minlength=n)
        for arr in (self.src, self.dst, self.weight, self._out_ptr,
                    self._in_ptr, self._in_src, self._in_wt,
                    self.out_strength, self.in_strength):
            arr.setflags(write=False)

    # ---- basic queries -----------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.urls)

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    @property
    def total_weight(self) -> int:
        return int(self.weight.sum())

    def node_id(self, url: str) -> int | None:
        return self._url_to_id.get(url)

    def url(self, node: int) -> str:
        return self.urls[node]

    def has_node(self, node: int) -> bool:
        return 0 <= node < len(self.urls)

    def out_edges(self, node: int):
        """Targets and weights of the edges leaving *node* (sorted by target)."""
        self._check_node(node)
        lo, hi = self._out_ptr[node], self._out_ptr[node + 1]
        return self.dst[lo:hi], self.weight[lo:hi]

    def in_edges(self, node: int):
        """Sources and weights of the edges entering *node* (sorted by source)."""
        self._check_node(node)
        lo, hi = self._in_ptr[node], self._in_ptr[node + 1]
        return self._in_src[lo:hi], self._in_wt[lo:hi]

    def edge_weight(self, u: int, v: int) -> int:
        """Weight of edge u->v, or 0 if absent."""
        dsts, wts = self.out_edges(u)
        self._check_node(v)
        i = np.searchsorted(dsts, v)
        if i < dsts.size and dsts[i] == v:
            return int(wts[i])
        return 0

    def edges(self) -> Iterator[tuple[int, int, int]]:
        for s, d, w in zip(self.src, self.dst, self.weight):
            yield int(s), int(d), int(w)

    def _check_node(self, node: int) -> None:
        if not 0 <= node < len(self.urls):
            raise ValueError(f"unknown node id {node!r}")

    def _check_nodes(self, nodes: Iterable[int]) -> np.ndarray:
        arr = np.fromiter((int(v) for v in nodes), dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= len(self.urls)):
            bad = arr[(arr < 0) | (arr >= len(self.urls))][0]
            raise ValueError(f"unknown node id {int(bad)}")
        return np.unique(arr)

    # ---- validation ---------------------------------------------------------

    def validate(self) -> None:
        """Check adjacency indexes against the edge list; raise on mismatch."""
        n = self.node_count
        if len(self._url_to_id) != n:
            raise AssertionError("symbol table not bijective")
        if self.weight.size and self.weight.min() < 1:
            raise AssertionError("edge weight < 1")
        pairs = set(zip(self.src.tolist(), self.dst.tolist()))
        if len(pairs) != self.edge_count:
            raise AssertionError("duplicate edges present")
        out_lists: dict[int, list[tuple[int, int]]] = {}
        in_lists: dict[int, list[tuple[int, int]]] = {}
        for s, d, w in self.edges():
            out_lists.setdefault(s, []).append((d, w))
            in_lists.setdefault(d, []).append((s, w))
        for u in range(n):
            dsts, wts = self.out_edges(u)
            if sorted(out_lists.get(u, [])) != list(zip(dsts.tolist(), wts.tolist())):
                raise AssertionError(f"out-adjacency inconsistent at node {u}")
            srcs, wts_in = self.in_edges(u)
            if sorted(in_lists.get(u, [])) != list(zip(srcs.tolist(), wts_in.tolist())):
                raise AssertionError(f"in-adjacency inconsistent at node {u}")
        if int(self.out_strength.sum()) != self.total_weight:
            raise AssertionError("out-strength sum != total weight")
        if int(self.in_strength.sum()) != self.total_weight:
            raise AssertionError("in-strength sum != total weight")

    def __repr__(self) -> str:
        return f"BrowseGraph(nodes={self.node_count}, edges={self.edge_count})"

    def equal_by_url(self, other: "BrowseGraph") -> bool:
        """Same node URLs and same URL-keyed weighted edges (ids may differ)."""
        if set(self.urls) != set(other.urls):
            return False
        mine = {(self.urls[s], self.urls[d]): w for s, d, w in self.edges()}
        theirs = {(other.urls[s], other.urls[d]): w for s, d, w in other.edges()}
        return mine == theirs


def build_graph(transitions: Iterable[tuple[str, str]]) -> BrowseGraph:
    """Build a graph from (source_url, target_url) pairs.

    Node ids are assigned in first-seen order; repeated pairs accumulate
    into the edge weight.  An empty input yields the empty graph.
    """
    urls: list[str] = []
    index: dict[str, int] = {}
    counts: dict[tuple[int, int], int] = {}

    def intern(url: str) -> int:
        i = index.get(url)
        if i is None:
            i = len(urls)
            index[url] = i
            urls.append(url)
        return i

    for s_url, t_url in transitions:
        key = (intern(s_url), intern(t_url))
        counts[key] = counts.get(key, 0) + 1

    if counts:
        src, dst = map(np.array, zip(*counts.keys()))
        weight = np.fromiter(counts.values(), dtype=np.int64)
    else:
        src = dst = weight = np.empty(0, dtype=np.int64)
    return BrowseGraph(urls, src, dst, weight)


def from_weighted_edges(urls: Sequence[str], edges: Iterable[tuple[int, int, int]]) -> BrowseGraph:
    """Construct directly from pre-aggregated (src, dst, weight) triples."""
    triples = list(edges)
    if triples:
        src, dst, weight = map(np.array, zip(*triples))
    else:
        src = dst = weight = np.empty(0, dtype=np.int64)
    return BrowseGraph(urls, src, dst, weight)


def density(nodes: int, edges: int) -> float:
    """Directed density edges / (n * (n - 1)); zero for graphs of size <= 1."""
    if nodes <= 1:
        return 0.0
    return edges / (nodes * (nodes - 1))


def _weak_component_labels(g: BrowseGraph) -> np.ndarray:
    """Union-find over the edge list, ignoring direction."""
    parent = np.arange(g.node_count, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for s, d in zip(g.src.tolist(), g.dst.tolist()):
        rs, rd = find(s), find(d)
        if rs != rd:
            parent[rd] = rs
    return np.fromiter((find(i) for i in range(g.node_count)), dtype=np.int64,
                       count=g.node_count)


def weak_components(g: BrowseGraph) -> list[set[int]]:
    """Weakly connected components as node-id sets."""
    labels = _weak_component_labels(g)
    comps: dict[int, set[int]] = {}
    for node, lab in enumerate(labels.tolist()):
        comps.setdefault(lab, set()).add(node)
    return list(comps.values())


def stats(g: BrowseGraph) -> GraphStats:
    """Node/edge counts, density, weak-GCC fraction and reciprocity.

    Reciprocity is the fraction of non-loop directed edges whose reverse edge
    is also present; self-loops are excluded from both sides of that ratio.
    """
    n, m = g.node_count, g.edge_count
    if n == 0:
        return GraphStats(0, 0, 0.0, 0.0, 0.0)
    labels = _weak_component_labels(g)
    gcc = int(np.bincount(labels, minlength=n).max()) if n else 0
    nonloop = g.src != g.dst
    total_nonloop = int(nonloop.sum())
    if total_nonloop:
        keys = set(zip(g.src[nonloop].tolist(), g.dst[nonloop].tolist()))
        recip = sum(1 for s, d in keys if (d, s) in keys) / total_nonloop
    else:
        recip = 0.0
    return GraphStats(n, m, density(n, m), gcc / n, recip)


def induced_subgraph(g: BrowseGraph, nodes: Iterable[int]) -> BrowseGraph:
    """Subgraph on *nodes* with exactly the edges of g inside the set.

    New ids follow ascending old-id order, so inducing twice with the same
    set is an identity.  Unknown ids raise ValueError.
    """
    keep = g._check_nodes(nodes)
    remap = np.full(g.node_count, -1, dtype=np.int64)
    remap[keep] = np.arange(keep.size)
    mask = (remap[g.src] >= 0) & (remap[g.dst] >= 0) if g.edge_count else np.empty(0, dtype=bool)
    urls = [g.urls[i] for i in keep.tolist()]
    return BrowseGraph(urls, remap[g.src[mask]], remap[g.dst[mask]], g.weight[mask])


def out_frontier(g: BrowseGraph, nodes: Iterable[int]) -> set[int]:
    """Targets of edges leaving the node set, minus the set itself."""
    inside = g._check_nodes(nodes)
    if inside.size == 0 or g.edge_count == 0:
        return set()
    member = np.zeros(g.node_count, dtype=bool)
    member[inside] = True
    targets = g.dst[member[g.src]]
    out = np.unique(targets[~member[targets]])
    return set(out.tolist())


# ---- TSV persistence ---------------------------------------------------------

def save_graph_tsv(g: BrowseGraph, path, nodes_path=None) -> None:
    """Write `source_url<TAB>target_url<TAB>weight` lines sorted by URL pair.

    The optional companion node file lists all URLs in id order; it is the
    only way to persist isolated nodes.
    """
    rows = sorted((g.urls[s], g.urls[d], w) for s, d, w in g.edges())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s_url, t_url, w in rows:
            fh.write(f"{s_url}\t{t_url}\t{w}\n")
    if nodes_path is not None:
        with open(nodes_path, "w", encoding="utf-8", newline="\n") as fh:
            for url in g.urls:
                fh.write(url + "\n")


def load_graph_tsv(path, nodes_path=None) -> BrowseGraph:
    """Read a graph written by :func:`save_graph_tsv`.

    Duplicate (source, target) lines and weights < 1 are rejected.
    """
    urls: list[str] = []
    index: dict[str, int] = {}
    if nodes_path is not None:
        with open(nodes_path, encoding="utf-8") as fh:
            for line in fh:
                url = line.rstrip("\n")
                if url in index:
                    raise ValueError(f"duplicate URL in node file: {url!r}")
                index[url] = len(urls)
                urls.append(url)

    def intern(url: str) -> int:
        i = index.get(url)
        if i is None:
            i = len(urls)
            index[url] = i
            urls.append(url)
        return i

    seen: set[tuple[int, int]] = set()
    src: list[int] = []
    dst: list[int] = []
    weight: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            s, t, w_str = parts
            try:
                w = int(w_str)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: weight is not an integer") from None
            if w < 1:
                raise ValueError(f"{path}:{lineno}: weight must be >= 1")
            key = (intern(s), intern(t))
            if key in seen:
                raise ValueError(f"{path}:{lineno}: duplicate edge {s!r} -> {t!r}")
            seen.add(key)
            src.append(key[0])
            dst.append(key[1])
            weight.append(w)
    return BrowseGraph(urls, src, dst, weight)
