import numpy as np
import pytest

from localrank.graph import build_graph, from_weighted_edges, induced_subgraph
from localrank.pagerank import pagerank
from localrank.rings import (expand_full, expand_top_percent,
                             make_initial_sets, run_rings)


def random_graph(rng, n_nodes, n_edges):
    urls = [f"p{i}" for i in range(n_nodes)]
    n_edges = min(n_edges, n_nodes * n_nodes)
    seen = set()
    while len(seen) < n_edges:
        seen.add((int(rng.integers(n_nodes)), int(rng.integers(n_nodes))))
    return from_weighted_edges(urls, [(s, d, 1) for s, d in seen])


def bfs_levels_oracle(g, start_nodes):
    """Out-BFS level sets via dict adjacency, independent of expand_full."""
    adj = {}
    for s, d, _ in g.edges():
        adj.setdefault(s, set()).add(d)
    frontier = set(start_nodes)
    seen = set(start_nodes)
    levels = [set(start_nodes)]
    while True:
        nxt = set()
        for u in frontier:
            nxt |= adj.get(u, set())
        nxt -= seen
        if not nxt:
            break
        seen |= nxt
        levels.append(set(seen))
        frontier = nxt
    return levels


# ---- expand_full ---------------------------------------------------------------

def test_expand_fixed_point_at_v():
    g = build_graph([("a", "b"), ("b", "c")])
    full = set(range(g.node_count))
    assert expand_full(g, full) == full


def test_expand_chain_one_hop():
    g = build_graph([("a", "b"), ("b", "c")])
    assert expand_full(g, {g.node_id("a")}) == {g.node_id("a"), g.node_id("b")}


def test_expand_matches_bfs_level_oracle():
    rng = np.random.default_rng(0)
    for _ in range(10):
        g = random_graph(rng, 40, 120)
        start = set(rng.choice(40, size=4, replace=False).tolist())
        levels = bfs_levels_oracle(g, start)
        current = start
        for expected in levels[1:]:
            current = expand_full(g, current)
            assert current == expected


def test_ring_k_is_distance_k_ball():
    rng = np.random.default_rng(1)
    g = random_graph(rng, 30, 70)
    start = {0}
    levels = bfs_levels_oracle(g, start)
    seq = run_rings(g, start, "full", max_rings=len(levels) + 2)
    for k, ring in enumerate(seq.rings):
        expected = levels[min(k, len(levels) - 1)]
        assert set(ring) == expected


# ---- expand_top_percent ----------------------------------------------------------

def test_top_percent_100_equals_full():
    rng = np.random.default_rng(2)
    for _ in range(10):
        g = random_graph(rng, 30, 80)
        start = set(rng.choice(30, size=3, replace=False).tolist())
        assert expand_top_percent(g, start, 100.0) == expand_full(g, start)


def test_top_percent_empty_frontier_unchanged():
    g = build_graph([("a", "b")])
    nodes = {g.node_id("a"), g.node_id("b")}
    assert expand_top_percent(g, nodes, 10.0) == nodes


def test_top_percent_prefers_hub():
    # Four spokes in H0 all point at one hub and at a private leaf each, so
    # the frontier is {hub, leaf1..leaf4} and the hub out-ranks every leaf in
    # the extended subgraph.  A 20% cut keeps ceil(5*0.2)=1 frontier node.
    edges = []
    for i in range(4):
        edges.append((f"s{i}", "hub"))
        edges.append((f"s{i}", f"leaf{i}"))
    g = build_graph(edges)
    start = {g.node_id(f"s{i}") for i in range(4)}

    # dense-oracle cross-check that the hub really is the top frontier node
    n = g.node_count
    P = np.zeros((n, n))
    for s, d, w in g.edges():
        P[s, d] = w
    strength = P.sum(axis=1)
    M = np.where(strength[:, None] > 0, P / np.where(strength[:, None] == 0, 1, strength[:, None]),
                 1.0 / n)
    G = 0.85 * M + 0.15 / n
    p = np.full(n, 1.0 / n)
    for _ in range(500):
        p = G.T @ p
    frontier = [g.node_id("hub")] + [g.node_id(f"leaf{i}") for i in range(4)]
    assert max(frontier, key=lambda v: p[v]) == g.node_id("hub")

    grown = expand_top_percent(g, start, 20.0)
    assert grown == start | {g.node_id("hub")}


def test_top_percent_validates_percent():
    g = build_graph([("a", "b")])
    with pytest.raises(ValueError):
        expand_top_percent(g, {0}, 0.0)
    with pytest.raises(ValueError):
        expand_top_percent(g, {0}, 101.0)


# ---- run_rings -----------------------------------------------------------------

def test_run_rings_from_full_graph():
    g = build_graph([("a", "b"), ("b", "a"), ("b", "c"), ("c", "a")])
    seq = run_rings(g, set(range(g.node_count)), "full")
    assert seq.taus == [1.0]
    assert seq.saturated


def test_run_rings_chain_tau_reaches_one():
    g = build_graph([("a", "b"), ("b", "c"), ("c", "d")])
    seq = run_rings(g, {g.node_id("a")}, "full")
    assert seq.taus[0] == 0.0  # single-node ring carries no ranking signal
    assert seq.taus[-1] == 1.0
    assert all(b >= a - 1e-12 for a, b in zip(seq.taus, seq.taus[1:]))
    assert seq.saturated
    assert [len(r) for r in seq.rings] == [1, 2, 3, 4]


def test_run_rings_rings_form_chain():
    rng = np.random.default_rng(3)
    g = random_graph(rng, 40, 100)
    seq = run_rings(g, {0, 1}, "full")
    for a, b in zip(seq.rings, seq.rings[1:]):
        assert a < b  # strict growth until saturation


def test_run_rings_saturating_tau_is_exactly_global():
    rng = np.random.default_rng(4)
    g = random_graph(rng, 25, 140)  # dense: expansion reaches everything
    seq = run_rings(g, {0}, "full")
    assert seq.saturated
    if len(seq.rings[-1]) == g.node_count:
        assert seq.taus[-1] == pytest.approx(1.0, abs=1e-9)


def test_run_rings_h0_graph_keeps_own_edges():
    g = build_graph([("a", "b"), ("b", "c"), ("c", "a"), ("a", "c")])
    h0 = build_graph([("a", "b")])  # sub-multiset of g's edges, non-induced
    seq = run_rings(g, h0, "full")
    assert seq.ring_sizes[0] == (2, 1)
    # ring 1 induces from g, so a->c appears
    assert seq.ring_sizes[1][0] == 3


def test_run_rings_h0_graph_with_unknown_url_errors():
    g = build_graph([("a", "b")])
    h0 = build_graph([("a", "zzz")])
    with pytest.raises(ValueError, match="does not appear"):
        run_rings(g, h0, "full")


def test_run_rings_unknown_strategy():
    g = build_graph([("a", "b")])
    with pytest.raises(ValueError, match="strategy"):
        run_rings(g, {0}, "fancy")


def test_run_rings_max_rings_cap():
    g = build_graph([(f"n{i}", f"n{i+1}") for i in range(9)])
    seq = run_rings(g, {g.node_id("n0")}, "full", max_rings=3)
    assert len(seq.rings) == 4  # H0..H3
    assert not seq.saturated


# ---- make_initial_sets -----------------------------------------------------------

def referrer_suite(rng):
    g = random_graph(rng, 120, 500)
    subs = []
    for i, size in enumerate((40, 30, 20)):
        nodes = sorted(rng.choice(120, size=size, replace=False).tolist())
        subs.append((f"ref{i}", induced_subgraph(g, nodes)))
    return g, subs


def test_rb_passthrough():
    rng = np.random.default_rng(5)
    g, subs = referrer_suite(rng)
    sets = make_initial_sets(g, subs, "RB")
    for (name, rg), (out_name, nodes) in zip(subs, sets):
        assert out_name == name
        assert {g.url(v) for v in nodes} == set(rg.urls)


def test_r_sizes_match_rb_sizes_exactly():
    rng = np.random.default_rng(6)
    g, subs = referrer_suite(rng)
    sets = make_initial_sets(g, subs, "R", rng=rng)
    for (name, rg), (_, nodes) in zip(subs, sets):
        assert len(nodes) == rg.node_count


def test_srb_sizes_within_band():
    rng = np.random.default_rng(7)
    g, subs = referrer_suite(rng)
    target = 15
    sets = make_initial_sets(g, subs, "SRB", target_size=target, rng=rng)
    for _, nodes in sets:
        assert target * (1 - 0.094) <= len(nodes) <= target * (1 + 0.094)


def test_srb_requires_target_size():
    rng = np.random.default_rng(8)
    g, subs = referrer_suite(rng)
    with pytest.raises(ValueError, match="target_size"):
        make_initial_sets(g, subs, "SRB")


def test_sampling_error_reports_achieved_sizes():
    g = build_graph([("a", "b"), ("c", "d")])  # two 2-node components
    with pytest.raises(ValueError, match="component sizes reached"):
        make_initial_sets(g, [("x", g)], "SRB", target_size=50,
                          rng=np.random.default_rng(0))


def test_unknown_regime_errors():
    g = build_graph([("a", "b")])
    with pytest.raises(ValueError, match="regime"):
        make_initial_sets(g, [("x", g)], "XX")
