"""Predicting local-vs-global rank divergence from local structure.

The training set is built by jackknife resampling: random node bulks are
removed from each graph, and the Kendall tau between the PageRank of the
full and the reduced graph becomes the regression target, paired with the
62 structural features of the reduced graph.  A random forest regresses the
tau; its quality is assessed with repeated k-fold cross-validation per
feature category, permutation importance, and a cross-graph ranking test
against the true local-vs-global tau of whole subgraphs.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .features import (DEFAULT_CLOSENESS_SAMPLE, FEATURE_CATEGORIES,
                       FEATURE_NAMES, FeatureVector, extract_features)
from .forest import ForestModel, fit_forest
from .graph import BrowseGraph, induced_subgraph
from .pagerank import DEFAULT_ALPHA, pagerank, scores_by_url
from .rankcmp import kendall_tau_b, rank_agreement, spearman_rho

__all__ = ["JackknifeSample", "JackknifeResult", "RankingEvaluation",
           "DEFAULT_FRACTIONS", "build_jackknife", "train_forest",
           "cross_validate", "permutation_importance", "rank_subgraphs",
           "samples_to_matrix", "save_samples_csv", "load_samples_csv"]

DEFAULT_FRACTIONS = (0.01, 0.05, 0.10, 0.20)
DEFAULT_SAMPLES_PER_CELL = 30
CATEGORY_SUBSETS = ("S", "A", "D", "W", "P", "C", "ALL")


@dataclass(frozen=True)
class JackknifeSample:
    """One reduced graph: its features and the tau against the full graph."""

    source_graph: str
    removal_fraction: float
    features: FeatureVector
    target_tau: float


@dataclass
class JackknifeResult:
    samples: list[JackknifeSample]
    skipped: int


@dataclass
class RankingEvaluation:
    """Cross-graph comparison of predicted vs. true tau orderings."""

    graph_names: list[str]
    true_taus: list[float]
    predicted_taus: list[float]
    spearman: float
    kendall: float
    tied_prediction: bool


def build_jackknife(
    graphs: Sequence[tuple[str, BrowseGraph]],
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    samples_per_cell: int = DEFAULT_SAMPLES_PER_CELL,
    alpha: float = DEFAULT_ALPHA,
    rng: np.random.Generator | None = None,
    closeness_sample: int = 64,
) -> JackknifeResult:
    """Jackknife training set over (graph, fraction, repetition) cells.

    Per cell a uniform random node bulk is removed so the reduced graph keeps
    round(n * (1 - fraction)) nodes; the target is the tau between full and
    reduced PageRank on the surviving nodes.  Cells whose reduced graph is
    empty or shares fewer than 2 nodes are skipped and counted.

    The default closeness sample is smaller than the extractor's to keep
    dataset construction fast; pass the extractor default to override.
    """
    rng = np.random.default_rng() if rng is None else rng
    samples: list[JackknifeSample] = []
    skipped = 0
    for name, g in graphs:
        n = g.node_count
        full_scores = scores_by_url(g, pagerank(g, alpha))
        for fraction in fractions:
            if not 0.0 <= fraction < 1.0:
                raise ValueError("removal fraction must lie in [0, 1)")
            keep_count = round(n * (1.0 - fraction))
            for _ in range(samples_per_cell):
                keep = np.sort(rng.choice(n, size=keep_count, replace=False))
                reduced = induced_subgraph(g, keep)
                if reduced.node_count < 2:
                    skipped += 1
                    continue
                local_rv = pagerank(reduced, alpha)
                local_scores = scores_by_url(reduced, local_rv)
                common = sorted(local_scores.keys() & full_scores.keys())
                if len(common) < 2:
                    skipped += 1
                    continue
                tau = kendall_tau_b([local_scores[u] for u in common],
                                    [full_scores[u] for u in common])
                feats = extract_features(reduced, local_rv, closeness_sample, rng)
                samples.append(JackknifeSample(name, fraction, feats, tau))
    return JackknifeResult(samples, skipped)


def samples_to_matrix(samples: Sequence[JackknifeSample]):
    """(X, y) arrays in sample order."""
    X = np.array([s.features.values for s in samples], dtype=float)
    y = np.array([s.target_tau for s in samples], dtype=float)
    return X, y


def train_forest(
    samples: Sequence[JackknifeSample],
    n_trees: int = 500,
    features_per_split: int | None = None,
    min_leaf: int = 2,
    seed: int = 0,
    bootstrap: bool = True,
) -> ForestModel:
    """Fit the regression forest on a jackknife sample list."""
    if len(samples) < 10:
        raise ValueError(f"need at least 10 samples to train, got {len(samples)}")
    X, y = samples_to_matrix(samples)
    return fit_forest(X, y, n_trees, features_per_split, min_leaf, seed,
                      bootstrap, list(FEATURE_NAMES))


def _subset_columns(subset: str) -> np.ndarray:
    if subset == "ALL":
        return np.arange(len(FEATURE_NAMES))
    cols = [i for i, c in enumerate(FEATURE_CATEGORIES) if c == subset]
    if not cols:
        raise ValueError(f"unknown feature subset {subset!r}")
    return np.array(cols)


def cross_validate(
    samples: Sequence[JackknifeSample],
    folds: int = 5,
    repeats: int = 10,
    forest_params: Mapping | None = None,
    seed: int = 0,
    subsets: Sequence[str] = CATEGORY_SUBSETS,
) -> dict[str, float]:
    """Repeated k-fold CV MSE for each feature-category subset.

    Returns subset name -> MSE averaged over all folds and repeats.  Fold
    assignment reshuffles per repeat; every (subset, repeat, fold) training
    gets its own derived seed, so the output is a pure function of
    (samples, parameters, seed).
    """
    if len(samples) < folds:
        raise ValueError("need at least `folds` samples")
    params = dict(forest_params or {})
    X_all, y = samples_to_matrix(samples)
    n = len(samples)
    root = np.random.SeedSequence(seed)
    shuffle_streams = root.spawn(repeats)
    train_streams = root.spawn(len(subsets) * repeats * folds)

    results: dict[str, float] = {}
    trainings = 0
    for subset in subsets:
        cols = _subset_columns(subset)
        X = X_all[:, cols]
        errors: list[float] = []
        for r in range(repeats):
            order = np.random.default_rng(shuffle_streams[r]).permutation(n)
            fold_sizes = np.full(folds, n // folds)
            fold_sizes[: n % folds] += 1
            start = 0
            for f in range(folds):
                test_idx = order[start:start + fold_sizes[f]]
                start += fold_sizes[f]
                train_idx = np.setdiff1d(order, test_idx)
                model = fit_forest(
                    X[train_idx], y[train_idx],
                    n_trees=params.get("n_trees", 100),
                    features_per_split=params.get("features_per_split"),
                    min_leaf=params.get("min_leaf", 2),
                    seed=int(train_streams[trainings].generate_state(1)[0]),
                    bootstrap=params.get("bootstrap", True),
                )
                trainings += 1
                pred = model.predict(X[test_idx])
                errors.append(float(((pred - y[test_idx]) ** 2).mean()))
        results[subset] = float(np.mean(errors))
    return results


def permutation_importance(
    model: ForestModel,
    samples: Sequence[JackknifeSample],
    repeats: int = 10,
    seed: int = 0,
) -> np.ndarray:
    """Mean MSE increase when one feature column is shuffled, per feature.

    Features the trees never consult score ~0; constant columns score exactly
    0 because any shuffle leaves them unchanged.
    """
    if len(samples) < 2:
        raise ValueError("need at least 2 samples")
    X, y = samples_to_matrix(samples)
    base = float(((model.predict(X) - y) ** 2).mean())
    p = X.shape[1]
    out = np.zeros(p)
    streams = np.random.SeedSequence(seed).spawn(p * repeats)
    for j in range(p):
        bump = 0.0
        for r in range(repeats):
            rng = np.random.default_rng(streams[j * repeats + r])
            shuffled = X.copy()
            shuffled[:, j] = shuffled[rng.permutation(X.shape[0]), j]
            mse = float(((model.predict(shuffled) - y) ** 2).mean())
            bump += mse - base
        out[j] = bump / repeats
    return out


def rank_subgraphs(
    model,
    graphs: Sequence[tuple[str, BrowseGraph]],
    global_graph: BrowseGraph,
    alpha: float = DEFAULT_ALPHA,
    closeness_sample: int = DEFAULT_CLOSENESS_SAMPLE,
    rng: np.random.Generator | None = None,
) -> RankingEvaluation:
    """Compare predicted and true local-vs-global tau across subgraphs.

    The true tau of a subgraph is the Kendall tau between its own PageRank
    and the global graph's PageRank on their common URLs; the prediction is
    the model applied to the subgraph's features.  When the model predicts a
    constant, the rank correlations are reported as 0 with a tie flag.
    """
    if len(graphs) < 3:
        raise ValueError("need at least 3 graphs to rank")
    rng = np.random.default_rng() if rng is None else rng
    global_scores = scores_by_url(global_graph, pagerank(global_graph, alpha))
    names, true_taus, rows = [], [], []
    for name, g in graphs:
        rv = pagerank(g, alpha)
        agree = rank_agreement(scores_by_url(g, rv), global_scores)
        names.append(name)
        true_taus.append(agree.kendall_tau)
        rows.append(extract_features(g, rv, closeness_sample, rng).values)
    predicted = model.predict(np.array(rows))
    tied = bool(np.all(predicted == predicted[0]))
    if tied:
        rho = tau = 0.0
    else:
        rho = spearman_rho(true_taus, predicted.tolist())
        tau = kendall_tau_b(true_taus, predicted.tolist())
    return RankingEvaluation(names, true_taus, [float(v) for v in predicted],
                             rho, tau, tied)


# ---- CSV persistence -----------------------------------------------------------

def save_samples_csv(samples: Sequence[JackknifeSample], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["graph", "fraction", "sample", *FEATURE_NAMES, "target_tau"])
        counters: dict[tuple[str, float], int] = {}
        for s in samples:
            key = (s.source_graph, s.removal_fraction)
            k = counters.get(key, 0)
            counters[key] = k + 1
            writer.writerow([s.source_graph, repr(s.removal_fraction), k,
                             *[repr(float(v)) for v in s.features.values],
                             repr(s.target_tau)])


def load_samples_csv(path) -> list[JackknifeSample]:
    samples: list[JackknifeSample] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = ["graph", "fraction", "sample", *FEATURE_NAMES, "target_tau"]
        if header != expected:
            raise ValueError(f"{path}: unexpected sample CSV header")
        for row in reader:
            values = np.array([float(v) for v in row[3:3 + len(FEATURE_NAMES)]])
            samples.append(JackknifeSample(
                row[0], float(row[1]), FeatureVector(values), float(row[-1])))
    return samples
