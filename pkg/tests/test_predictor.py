import numpy as np
import pytest

from localrank.features import FEATURE_NAMES, FeatureVector
from localrank.forest import fit_forest
from localrank.graph import build_graph, from_weighted_edges
from localrank.predictor import (JackknifeSample, build_jackknife,
                                 cross_validate, load_samples_csv,
                                 permutation_importance, rank_subgraphs,
                                 samples_to_matrix, save_samples_csv,
                                 train_forest)


def random_connected_graph(rng, n_nodes, extra_edges):
    """Cycle backbone plus random chords, so every node has degree >= 1."""
    urls = [f"p{i}" for i in range(n_nodes)]
    edges = {(i, (i + 1) % n_nodes): 1 for i in range(n_nodes)}
    while len(edges) < n_nodes + extra_edges:
        edges[(int(rng.integers(n_nodes)), int(rng.integers(n_nodes)))] = \
            int(rng.integers(1, 5))
    return from_weighted_edges(urls, [(s, d, w) for (s, d), w in edges.items()])


def synthetic_samples(rng, n=60):
    """Jackknife-shaped samples with a learnable planted signal."""
    samples = []
    for i in range(n):
        values = rng.random(62)
        tau = float(np.clip(0.2 + 0.7 * values[10] + rng.normal(0, 0.02), -1, 1))
        samples.append(JackknifeSample(f"g{i % 4}", 0.05,
                                       FeatureVector(values), tau))
    return samples


# ---- build_jackknife -------------------------------------------------------------

def test_zero_fraction_gives_tau_one():
    rng = np.random.default_rng(0)
    g = random_connected_graph(rng, 120, 240)
    result = build_jackknife([("g", g)], fractions=[0.0], samples_per_cell=2,
                             rng=np.random.default_rng(1))
    assert result.skipped == 0
    for s in result.samples:
        assert s.target_tau == 1.0


def test_reduced_node_count_arithmetic():
    rng = np.random.default_rng(2)
    g = random_connected_graph(rng, 100, 150)
    result = build_jackknife([("g", g)], fractions=[0.2], samples_per_cell=3,
                             rng=np.random.default_rng(3))
    for s in result.samples:
        assert s.features["s_nodes"] == 80.0


def test_mean_tau_decreases_with_fraction():
    rng = np.random.default_rng(4)
    graphs = [(f"g{i}", random_connected_graph(rng, 150, 400)) for i in range(3)]
    result = build_jackknife(graphs, fractions=[0.01, 0.05, 0.10, 0.20],
                             samples_per_cell=8, rng=np.random.default_rng(5))
    means = []
    for f in (0.01, 0.05, 0.10, 0.20):
        taus = [s.target_tau for s in result.samples if s.removal_fraction == f]
        means.append(np.mean(taus))
    assert means[0] > means[-1]
    assert all(b <= a + 0.02 for a, b in zip(means, means[1:]))


def test_degenerate_cell_skipped_and_counted():
    rng = np.random.default_rng(6)
    g = random_connected_graph(rng, 100, 100)
    result = build_jackknife([("g", g)], fractions=[0.995], samples_per_cell=4,
                             rng=np.random.default_rng(7))
    assert result.skipped > 0
    assert len(result.samples) + result.skipped == 4


def test_sample_tagging():
    rng = np.random.default_rng(8)
    g = random_connected_graph(rng, 100, 150)
    result = build_jackknife([("tag", g)], fractions=[0.05], samples_per_cell=2,
                             rng=np.random.default_rng(9))
    assert {s.source_graph for s in result.samples} == {"tag"}
    assert {s.removal_fraction for s in result.samples} == {0.05}


# ---- train_forest ----------------------------------------------------------------

def test_train_forest_needs_ten_samples():
    samples = synthetic_samples(np.random.default_rng(0), n=9)
    with pytest.raises(ValueError, match="at least 10"):
        train_forest(samples)


def test_train_forest_learns_signal():
    samples = synthetic_samples(np.random.default_rng(1), n=120)
    model = train_forest(samples, n_trees=40, seed=0)
    X, y = samples_to_matrix(samples)
    mse = float(((model.predict(X) - y) ** 2).mean())
    assert mse < float(((y.mean() - y) ** 2).mean())


# ---- cross_validate --------------------------------------------------------------

def test_cross_validate_subsets_and_determinism():
    samples = synthetic_samples(np.random.default_rng(2), n=50)
    params = {"n_trees": 8}
    a = cross_validate(samples, folds=5, repeats=2, forest_params=params, seed=3)
    b = cross_validate(samples, folds=5, repeats=2, forest_params=params, seed=3)
    assert a == b
    assert set(a) == {"S", "A", "D", "W", "P", "C", "ALL"}
    assert all(np.isfinite(v) for v in a.values())


def test_leave_one_out_finite():
    samples = synthetic_samples(np.random.default_rng(3), n=12)
    result = cross_validate(samples, folds=12, repeats=1,
                            forest_params={"n_trees": 4}, seed=0,
                            subsets=("ALL",))
    assert np.isfinite(result["ALL"])


def test_junk_feature_robustness():
    # an all-constant extra column cannot change what splits are available,
    # so CV MSE must stay in the same ballpark (smoke property)
    rng = np.random.default_rng(4)
    samples = synthetic_samples(rng, n=60)
    base = cross_validate(samples, folds=5, repeats=2,
                          forest_params={"n_trees": 20}, seed=5,
                          subsets=("ALL",))["ALL"]
    constant = []
    for s in samples:
        vals = s.features.values.copy()
        vals[0] = 1.234  # s_nodes column already constant-ish; force exact
        constant.append(JackknifeSample(s.source_graph, s.removal_fraction,
                                        FeatureVector(vals), s.target_tau))
    shifted = cross_validate(constant, folds=5, repeats=2,
                             forest_params={"n_trees": 20}, seed=5,
                             subsets=("ALL",))["ALL"]
    assert abs(shifted - base) < 0.1 * max(base, shifted)


# ---- permutation importance --------------------------------------------------------

def test_constant_feature_importance_exactly_zero():
    rng = np.random.default_rng(5)
    samples = []
    for _ in range(40):
        values = rng.random(62)
        values[7] = 0.5  # constant column
        samples.append(JackknifeSample("g", 0.05, FeatureVector(values),
                                       float(values[3])))
    model = train_forest(samples, n_trees=10, seed=0)
    imp = permutation_importance(model, samples, repeats=3, seed=1)
    assert imp[7] == 0.0


def test_planted_signal_ranked_first():
    rng = np.random.default_rng(6)
    samples = []
    for _ in range(80):
        values = rng.random(62)
        samples.append(JackknifeSample("g", 0.05, FeatureVector(values),
                                       float(values[20])))
    model = train_forest(samples, n_trees=30, seed=2)
    imp = permutation_importance(model, samples, repeats=5, seed=3)
    assert int(np.argmax(imp)) == 20
    assert imp[20] > 10 * np.partition(imp, -2)[-2]


def test_importance_deterministic():
    samples = synthetic_samples(np.random.default_rng(7), n=40)
    model = train_forest(samples, n_trees=10, seed=4)
    a = permutation_importance(model, samples, repeats=4, seed=9)
    b = permutation_importance(model, samples, repeats=4, seed=9)
    assert np.array_equal(a, b)


# ---- rank_subgraphs --------------------------------------------------------------

class OracleModel:
    """Stub returning a fixed value per row, keyed by a feature column."""

    def __init__(self, mapping):
        self.mapping = mapping  # s_nodes value -> predicted tau

    def predict(self, X):
        return np.array([self.mapping[float(row[FEATURE_NAMES.index("s_nodes")])]
                         for row in np.atleast_2d(X)])


class ConstantModel:
    def predict(self, X):
        return np.full(np.atleast_2d(X).shape[0], 0.5)


def subgraph_suite(rng):
    G = random_connected_graph(rng, 200, 600)
    graphs = []
    for i, size in enumerate((40, 70, 100, 130)):
        nodes = sorted(rng.choice(200, size=size, replace=False).tolist())
        from localrank.graph import induced_subgraph
        graphs.append((f"s{i}", induced_subgraph(G, nodes)))
    return G, graphs


def test_oracle_model_gives_spearman_one():
    rng = np.random.default_rng(8)
    G, graphs = subgraph_suite(rng)
    from localrank.pagerank import pagerank, scores_by_url
    from localrank.rankcmp import rank_agreement
    global_scores = scores_by_url(G, pagerank(G))
    mapping = {}
    for name, g in graphs:
        local = scores_by_url(g, pagerank(g))
        mapping[float(g.node_count)] = rank_agreement(local, global_scores).kendall_tau
    evaluation = rank_subgraphs(OracleModel(mapping), graphs, G,
                                rng=np.random.default_rng(0))
    assert evaluation.spearman == pytest.approx(1.0)
    assert evaluation.kendall == pytest.approx(1.0)
    assert not evaluation.tied_prediction


def test_constant_model_reports_zero_with_tie_flag():
    rng = np.random.default_rng(9)
    G, graphs = subgraph_suite(rng)
    evaluation = rank_subgraphs(ConstantModel(), graphs, G,
                                rng=np.random.default_rng(0))
    assert evaluation.spearman == 0.0
    assert evaluation.kendall == 0.0
    assert evaluation.tied_prediction


def test_rank_subgraphs_needs_three_graphs():
    rng = np.random.default_rng(10)
    G, graphs = subgraph_suite(rng)
    with pytest.raises(ValueError, match="at least 3"):
        rank_subgraphs(ConstantModel(), graphs[:2], G)


# ---- CSV persistence ---------------------------------------------------------------

def test_samples_csv_round_trip(tmp_path):
    samples = synthetic_samples(np.random.default_rng(11), n=15)
    path = tmp_path / "samples.csv"
    save_samples_csv(samples, path)
    loaded = load_samples_csv(path)
    assert len(loaded) == 15
    for a, b in zip(samples, loaded):
        assert a.source_graph == b.source_graph
        assert a.removal_fraction == b.removal_fraction
        assert a.target_tau == b.target_tau
        assert np.array_equal(a.features.values, b.features.values)
