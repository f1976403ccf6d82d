import math

import numpy as np
import pytest

from localrank.graph import build_graph, from_weighted_edges
from localrank.surfer import (identify_referrer, step_likelihood,
                              surfer_curves, trace_gaps, walk_step)


def chain(*names):
    return build_graph(list(zip(names, names[1:])))


# ---- walk_step -----------------------------------------------------------------

def test_forced_move_single_successor():
    g = build_graph([("a", "b"), ("b", "a")])
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert walk_step(g, g.node_id("a"), 1.0, rng) == g.node_id("b")


def test_dangling_node_teleports_uniformly():
    g = build_graph([(f"n{i}", "sink") for i in range(9)])
    sink = g.node_id("sink")
    rng = np.random.default_rng(1)
    draws = 100_000
    counts = np.zeros(g.node_count)
    for _ in range(draws):
        counts[walk_step(g, sink, 0.85, rng)] += 1
    expected = draws / g.node_count
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # chi-square with 9 dof: 99.9th percentile is ~27.9
    assert chi2 < 30.0


def test_weighted_successor_frequencies():
    g = from_weighted_edges(["u", "v", "x"], [(0, 1, 3), (0, 2, 1)])
    alpha, draws = 0.85, 100_000
    rng = np.random.default_rng(2)
    hits = {1: 0, 2: 0}
    for _ in range(draws):
        nxt = walk_step(g, 0, alpha, rng)
        if nxt in hits:
            hits[nxt] += 1
    n = g.node_count
    for node, edge_p in ((1, 0.75), (2, 0.25)):
        p = alpha * edge_p + (1 - alpha) / n
        sigma = math.sqrt(draws * p * (1 - p))
        assert abs(hits[node] - draws * p) < 3 * sigma


def test_walk_on_empty_graph_errors():
    with pytest.raises(ValueError):
        walk_step(build_graph([]), 0, 0.85, np.random.default_rng(0))


# ---- step_likelihood -----------------------------------------------------------

def test_likelihood_successor_branch():
    g = from_weighted_edges(["a", "b", "c"], [(0, 1, 1), (0, 2, 1)])
    p = step_likelihood(g, "a", "b", 0.85, 100)
    assert p == pytest.approx(0.15 / 100 + 0.85 * 0.5)
    assert p == pytest.approx(0.4265)


def test_likelihood_non_successor_branch():
    g = build_graph([("a", "b")])
    p = step_likelihood(g, "a", "zzz", 0.85, 100)
    assert p == pytest.approx(0.0015)


def test_likelihood_dangling_branch():
    g = build_graph([("a", "b")])
    assert step_likelihood(g, "b", "a", 0.85, 100) == pytest.approx(0.01)
    assert step_likelihood(g, "not-present", "a", 0.85, 100) == pytest.approx(0.01)


def test_likelihood_always_in_unit_interval():
    rng = np.random.default_rng(3)
    urls = [f"p{i}" for i in range(12)]
    g = build_graph([(urls[rng.integers(12)], urls[rng.integers(12)])
                     for _ in range(40)])
    for _ in range(500):
        a = urls[rng.integers(12)]
        b = urls[rng.integers(12)]
        p = step_likelihood(g, a, b, float(rng.uniform(0.05, 0.95)),
                            int(rng.integers(1, 500)))
        assert 0.0 < p <= 1.0


def test_likelihood_parameter_validation():
    g = build_graph([("a", "b")])
    with pytest.raises(ValueError):
        step_likelihood(g, "a", "b", 1.0, 10)
    with pytest.raises(ValueError):
        step_likelihood(g, "a", "b", 0.5, 0)


# ---- identify_referrer -----------------------------------------------------------

def disjoint_candidates():
    # Complete digraphs (self-loops included) over disjoint URL sets: every
    # observed step, teleports included, is a successor move of the true
    # graph, so the wrong candidate is forced through the flat fallback and
    # loses deterministically at every single step.
    def complete(tag):
        urls = [f"{n}{tag}" for n in "abc"]
        return build_graph([(u, v) for u in urls for v in urls])

    return [complete(0), complete(1)]


def test_singleton_candidate_identified():
    g = build_graph([("a", "b"), ("b", "a")])
    trace, verdict = identify_referrer([g], 0, rng=np.random.default_rng(0))
    assert verdict.identified_index == 0
    assert verdict.steps_taken >= 1
    assert verdict.correct


def test_disjoint_graphs_identified_at_step_one():
    candidates = disjoint_candidates()
    for seed in range(30):
        rng = np.random.default_rng(seed)
        trace, verdict = identify_referrer(candidates, 1, margin_threshold=0.0,
                                           rng=rng)
        assert verdict.correct
        assert verdict.margin > 0.0
        assert verdict.steps_taken == 1


def test_reproducible_given_seed():
    candidates = disjoint_candidates()
    runs = [identify_referrer(candidates, 0, rng=np.random.default_rng(99))
            for _ in range(2)]
    (t1, v1), (t2, v2) = runs
    assert t1.visited == t2.visited
    assert np.array_equal(t1.log_probs, t2.log_probs)
    assert v1 == v2


def test_log_probs_non_increasing_over_steps():
    candidates = disjoint_candidates()
    trace, _ = identify_referrer(candidates, 0, max_steps=15,
                                 margin_threshold=None,
                                 rng=np.random.default_rng(5))
    hist = np.array(trace.history)
    assert (np.diff(hist, axis=0) <= 1e-12).all()


def test_early_stop_never_before_step_one():
    candidates = disjoint_candidates()
    for seed in range(10):
        _, verdict = identify_referrer(candidates, 0, margin_threshold=0.0,
                                       rng=np.random.default_rng(seed))
        assert verdict.steps_taken >= 1


def test_margin_non_negative():
    candidates = disjoint_candidates()
    for seed in range(10):
        _, verdict = identify_referrer(candidates, 0,
                                       rng=np.random.default_rng(seed))
        assert verdict.margin >= 0.0


def test_true_graph_majorizes_disjoint_alternative():
    # On structurally disjoint graphs the wrong candidate is forced through
    # the flat fallback at every step, so the true graph must lead on average.
    candidates = disjoint_candidates()
    wins = 0
    runs = 200
    for seed in range(runs):
        trace, _ = identify_referrer(candidates, 0, max_steps=5,
                                     margin_threshold=None,
                                     rng=np.random.default_rng(seed))
        if trace.log_probs[0] > trace.log_probs[1]:
            wins += 1
    # binomial(200, 0.5) has its 99.99th percentile well below 140
    assert wins > 140


def test_per_graph_universe_mode():
    candidates = disjoint_candidates()
    _, verdict = identify_referrer(candidates, 0, n_mode="per_graph",
                                   rng=np.random.default_rng(1))
    assert verdict.correct


# ---- surfer_curves --------------------------------------------------------------

def test_curves_single_run_matches_trace():
    candidates = disjoint_candidates()
    curves = surfer_curves(candidates, runs=1, max_steps=6, seed=7)
    stream = np.random.SeedSequence(7).spawn(len(candidates) * 1)[0]
    trace, _ = identify_referrer(candidates, 0, max_steps=6,
                                 margin_threshold=None,
                                 rng=np.random.default_rng(stream))
    assert curves.mean_gap[0] == pytest.approx(trace_gaps(trace))


def test_curves_gap_zero_at_step_zero():
    curves = surfer_curves(disjoint_candidates(), runs=5, max_steps=4, seed=0)
    assert curves.mean_gap[:, 0] == pytest.approx([0.0, 0.0])


def test_disjoint_gap_growth_matches_formula():
    # All shared-URL mass is absent, so each step adds exactly
    # log(p_true) - log(1/n_universe) to the gap.
    candidates = disjoint_candidates()
    n_uni = 6
    rng = np.random.default_rng(3)
    trace, _ = identify_referrer(candidates, 0, max_steps=8,
                                 margin_threshold=None, rng=rng)
    gaps = trace_gaps(trace)
    g0 = candidates[0]
    for s in range(1, len(trace.visited)):
        p_true = step_likelihood(g0, trace.visited[s - 1], trace.visited[s],
                                 0.85, n_uni)
        expected_increment = math.log(p_true) - math.log(1.0 / n_uni)
        assert gaps[s] - gaps[s - 1] == pytest.approx(expected_increment)


def test_curves_shapes_and_accuracy_bounds():
    curves = surfer_curves(disjoint_candidates(), runs=8, max_steps=5, seed=1)
    assert curves.mean_gap.shape == (2, 6)
    assert curves.accuracy.shape == (2, 6)
    assert ((curves.accuracy >= 0) & (curves.accuracy <= 1)).all()
    assert curves.accuracy[:, 0] == pytest.approx([0.5, 0.5])
