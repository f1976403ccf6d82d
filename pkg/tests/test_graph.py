import numpy as np
import pytest

from localrank.graph import (BrowseGraph, build_graph, density,
                             from_weighted_edges, induced_subgraph,
                             load_graph_tsv, out_frontier, save_graph_tsv,
                             stats, weak_components)


def random_transitions(rng, n_pairs, n_urls):
    urls = [f"http://news.example/p{i}" for i in range(n_urls)]
    return [(urls[rng.integers(n_urls)], urls[rng.integers(n_urls)])
            for _ in range(n_pairs)]


# ---- oracles -------------------------------------------------------------------

def gcc_fraction_oracle(g):
    """Largest undirected component via plain dict BFS (independent of the
    union-find used by stats)."""
    adj = {i: set() for i in range(g.node_count)}
    for s, d, _ in g.edges():
        adj[s].add(d)
        adj[d].add(s)
    seen, best = set(), 0
    for start in range(g.node_count):
        if start in seen:
            continue
        comp = 0
        queue = [start]
        seen.add(start)
        while queue:
            u = queue.pop()
            comp += 1
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        best = max(best, comp)
    return best / g.node_count if g.node_count else 0.0


def frontier_oracle(g, nodes):
    nodes = set(nodes)
    return {d for s, d, _ in g.edges() if s in nodes and d not in nodes}


# ---- build_graph ---------------------------------------------------------------

def test_build_empty():
    g = build_graph([])
    assert g.node_count == 0
    assert g.edge_count == 0


def test_build_multiplicity():
    g = build_graph([("a", "b"), ("a", "b"), ("b", "a")])
    assert g.node_count == 2
    assert g.edge_weight(g.node_id("a"), g.node_id("b")) == 2
    assert g.edge_weight(g.node_id("b"), g.node_id("a")) == 1


def test_build_total_weight_equals_input_lines():
    rng = np.random.default_rng(42)
    pairs = random_transitions(rng, 1000, 50)
    g = build_graph(pairs)
    assert g.total_weight == len(pairs)


def test_first_seen_node_order():
    g = build_graph([("c", "a"), ("a", "b")])
    assert g.urls == ("c", "a", "b")


def test_self_loop_allowed():
    g = build_graph([("a", "a")])
    assert g.edge_weight(0, 0) == 1


def test_duplicate_edge_rejected_in_constructor():
    with pytest.raises(ValueError, match="duplicate"):
        BrowseGraph(["a", "b"], [0, 0], [1, 1], [1, 2])


def test_zero_weight_rejected():
    with pytest.raises(ValueError, match="weight"):
        from_weighted_edges(["a", "b"], [(0, 1, 0)])


# ---- stats ---------------------------------------------------------------------

def test_density_published_inventory_row():
    # 142,646 nodes / 779,185 edges is one row of a crawl-subgraph inventory
    assert density(142646, 779185) == pytest.approx(3.8e-5, rel=0.03)


def test_density_degenerate():
    assert density(0, 0) == 0.0
    assert density(1, 0) == 0.0


def test_stats_symmetric_pair():
    g = build_graph([("a", "b"), ("b", "a")])
    s = stats(g)
    assert s.reciprocity == 1.0
    assert s.gcc_fraction == 1.0
    assert s.density == 1.0


def test_stats_reciprocity_excludes_self_loops():
    g = build_graph([("a", "a"), ("a", "b"), ("b", "a"), ("b", "c")])
    # non-loop edges: a->b, b->a (reciprocated), b->c (not)
    assert stats(g).reciprocity == pytest.approx(2 / 3)


def test_gcc_fraction_matches_bfs_oracle():
    rng = np.random.default_rng(7)
    for _ in range(10):
        g = build_graph(random_transitions(rng, 60, 100))
        assert stats(g).gcc_fraction == pytest.approx(gcc_fraction_oracle(g))


# ---- induced subgraph ----------------------------------------------------------

def test_induced_identity():
    rng = np.random.default_rng(3)
    g = build_graph(random_transitions(rng, 200, 30))
    h = induced_subgraph(g, range(g.node_count))
    assert h.equal_by_url(g)


def test_induced_empty():
    g = build_graph([("a", "b")])
    h = induced_subgraph(g, [])
    assert h.node_count == 0 and h.edge_count == 0


def test_induced_triangle_restriction():
    g = build_graph([("a", "b"), ("b", "c"), ("c", "a")])
    h = induced_subgraph(g, [g.node_id("a"), g.node_id("b")])
    assert h.node_count == 2
    assert list(h.edges()) == [(h.node_id("a"), h.node_id("b"), 1)]


def test_induced_idempotent():
    rng = np.random.default_rng(11)
    g = build_graph(random_transitions(rng, 150, 40))
    keep = list(range(0, g.node_count, 2))
    h1 = induced_subgraph(g, keep)
    h2 = induced_subgraph(h1, range(h1.node_count))
    assert h1.urls == h2.urls
    assert list(h1.edges()) == list(h2.edges())


def test_induced_unknown_node_errors():
    g = build_graph([("a", "b")])
    with pytest.raises(ValueError, match="unknown node"):
        induced_subgraph(g, [0, 99])


# ---- out_frontier --------------------------------------------------------------

def test_frontier_path():
    g = build_graph([("a", "b"), ("b", "c")])
    assert out_frontier(g, [g.node_id("a")]) == {g.node_id("b")}


def test_frontier_saturated():
    g = build_graph([("a", "b"), ("b", "c")])
    assert out_frontier(g, range(g.node_count)) == set()


def test_frontier_matches_edge_scan_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = build_graph(random_transitions(rng, 120, 35))
        nodes = set(rng.choice(g.node_count, size=10, replace=False).tolist())
        assert out_frontier(g, nodes) == frontier_oracle(g, nodes)


def test_frontier_disjoint_from_input():
    rng = np.random.default_rng(9)
    g = build_graph(random_transitions(rng, 120, 35))
    nodes = set(rng.choice(g.node_count, size=8, replace=False).tolist())
    assert out_frontier(g, nodes) & nodes == set()


def test_frontier_unknown_node_errors():
    g = build_graph([("a", "b")])
    with pytest.raises(ValueError, match="unknown node"):
        out_frontier(g, [5])


# ---- invariants ----------------------------------------------------------------

def test_strength_sums_equal_total_weight():
    rng = np.random.default_rng(13)
    g = build_graph(random_transitions(rng, 500, 60))
    assert g.out_strength.sum() == g.total_weight
    assert g.in_strength.sum() == g.total_weight


def _truncate_2sig(x):
    import math
    exp = math.floor(math.log10(abs(x)))
    scale = 10.0 ** (exp - 1)
    return math.floor(x / scale) * scale


SUBGRAPH_INVENTORY = [
    # (nodes, edges, density at 2 significant digits)
    (142646, 779185, 3.8e-5),
    (101116, 404378, 3.9e-5),
    (61531, 255464, 6.7e-5),
    (60287, 335836, 9.2e-5),
    (21060, 70266, 1.5e-4),
    (4206, 7080, 4.0e-4),
    (2445, 4868, 8.1e-4),
]


@pytest.mark.parametrize("nodes,edges,expected", SUBGRAPH_INVENTORY)
def test_density_inventory_two_significant_digits(nodes, edges, expected):
    assert _truncate_2sig(density(nodes, edges)) == pytest.approx(expected)


def test_weak_components_partition():
    g = build_graph([("a", "b"), ("c", "d")])
    comps = weak_components(g)
    assert sorted(len(c) for c in comps) == [2, 2]


# ---- persistence ---------------------------------------------------------------

def test_tsv_round_trip(tmp_path):
    rng = np.random.default_rng(17)
    g = build_graph(random_transitions(rng, 100, 25))
    path = tmp_path / "g.tsv"
    save_graph_tsv(g, path)
    h = load_graph_tsv(path)
    assert h.equal_by_url(g)


def test_tsv_nodes_file_preserves_isolated(tmp_path):
    g = from_weighted_edges(["a", "b", "lonely"], [(0, 1, 2)])
    save_graph_tsv(g, tmp_path / "g.tsv", tmp_path / "g.nodes")
    h = load_graph_tsv(tmp_path / "g.tsv", tmp_path / "g.nodes")
    assert h.urls == g.urls
    assert h.equal_by_url(g)


def test_tsv_writer_deterministic(tmp_path):
    rng = np.random.default_rng(19)
    g = build_graph(random_transitions(rng, 100, 25))
    save_graph_tsv(g, tmp_path / "a.tsv")
    save_graph_tsv(g, tmp_path / "b.tsv")
    assert (tmp_path / "a.tsv").read_bytes() == (tmp_path / "b.tsv").read_bytes()


def test_tsv_duplicate_edge_rejected(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("a\tb\t1\na\tb\t2\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_graph_tsv(path)


def test_validator_passes_on_fresh_graph():
    rng = np.random.default_rng(23)
    g = build_graph(random_transitions(rng, 80, 20))
    g.validate()
