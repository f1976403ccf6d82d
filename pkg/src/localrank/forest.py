"""Random-forest regression built on axis-aligned variance-splitting trees.

Each tree is grown on a bootstrap resample; every split considers a fresh
uniform subset of the features and picks the threshold minimizing the summed
squared error of the two children.  Leaves predict the mean target of their
samples; the forest predicts the arithmetic mean over its trees.  Everything
is driven by a single seed, so training, prediction and the JSON round-trip
are fully reproducible.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ForestModel", "fit_forest", "save_model", "load_model",
           "MODEL_FORMAT"]

MODEL_FORMAT = "localrank-forest/1"


def _fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    rng: np.random.Generator,
    features_per_split: int,
    min_leaf: int,
) -> dict:
    """Grow one tree over the sample rows *idx*; returns a nested node dict."""
    ys = y[idx]
    if idx.size < 2 * min_leaf or float(ys.max() - ys.min()) == 0.0:
        return {"v": float(ys.mean())}

    p = X.shape[1]
    k = min(features_per_split, p)
    feats = rng.choice(p, size=k, replace=False)

    cols = X[np.ix_(idx, feats)]
    order = np.argsort(cols, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(cols, order, axis=0)
    sorted_y = ys[order]

    m = idx.size
    csum = np.cumsum(sorted_y, axis=0)
    csq = np.cumsum(sorted_y ** 2, axis=0)
    total_sum = csum[-1]
    total_sq = csq[-1]

    sizes_left = np.arange(1, m, dtype=float)[:, None]
    sum_left = csum[:-1]
    sq_left = csq[:-1]
    sse = (sq_left - sum_left ** 2 / sizes_left) \
        + ((total_sq - sq_left) - (total_sum - sum_left) ** 2 / (m - sizes_left))

    valid = sorted_vals[:-1] < sorted_vals[1:]
    if min_leaf > 1:
        valid[:min_leaf - 1] = False
        valid[m - min_leaf:] = False
    sse = np.where(valid, sse, np.inf)

    flat = int(np.argmin(sse))
    row, col = flat // k, flat % k
    if not np.isfinite(sse[row, col]):
        return {"v": float(ys.mean())}

    feat = int(feats[col])
    lo, hi = float(sorted_vals[row, col]), float(sorted_vals[row + 1, col])
    threshold = 0.5 * (lo + hi)
    if threshold >= hi:  # adjacent floats: midpoint rounded up to hi
        threshold = lo
    go_left = X[idx, feat] <= threshold
    left_idx = idx[go_left]
    right_idx = idx[~go_left]
    if left_idx.size == 0 or right_idx.size == 0:
        return {"v": float(ys.mean())}
    return {
        "f": feat,
        "t": threshold,
        "l": _fit_tree(X, y, left_idx, rng, features_per_split, min_leaf),
        "r": _fit_tree(X, y, right_idx, rng, features_per_split, min_leaf),
    }


def _predict_tree(node: dict, X: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    if "v" in node:
        out[idx] = node["v"]
        return
    mask = X[idx, node["f"]] <= node["t"]
    _predict_tree(node["l"], X, idx[mask], out)
    _predict_tree(node["r"], X, idx[~mask], out)


@dataclass
class ForestModel:
    """Trained regression forest; prediction averages its trees."""

    trees: list[dict]
    n_trees: int
    features_per_split: int
    min_leaf: int
    training_seed: int
    n_features: int
    feature_names: list[str] = field(default_factory=list)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"model expects {self.n_features} features, got {X.shape[1]}")
        idx = np.arange(X.shape[0])
        acc = np.zeros(X.shape[0])
        buf = np.empty(X.shape[0])
        for tree in self.trees:
            _predict_tree(tree, X, idx, buf)
            acc += buf
        return acc / len(self.trees)

    def predict_per_tree(self, X: np.ndarray) -> np.ndarray:
        """(n_trees, n_samples) matrix of individual tree predictions."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        idx = np.arange(X.shape[0])
        out = np.empty((len(self.trees), X.shape[0]))
        for t, tree in enumerate(self.trees):
            _predict_tree(tree, X, idx, out[t])
        return out


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = 500,
    features_per_split: int | None = None,
    min_leaf: int = 2,
    seed: int = 0,
    bootstrap: bool = True,
    feature_names: list[str] | None = None,
) -> ForestModel:
    """Train a forest on the (samples x features) matrix *X* and targets *y*.

    *features_per_split* defaults to ceil(p / 3).  With ``bootstrap=False``
    every tree sees the full training set (useful for the memorizing
    single-tree configuration).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, p) and y (n,) with matching n")
    n, p = X.shape
    if n < min_leaf:
        raise ValueError(f"need at least min_leaf={min_leaf} samples, got {n}")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if features_per_split is None:
        features_per_split = math.ceil(p / 3)
    if features_per_split < 1:
        raise ValueError("features_per_split must be >= 1")

    streams = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(streams[t])
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(_fit_tree(X, y, np.asarray(idx), rng,
                               features_per_split, min_leaf))
    return ForestModel(trees, n_trees, features_per_split, min_leaf, seed, p,
                       list(feature_names or []))


def save_model(model: ForestModel, path) -> None:
    """Versioned JSON dump; stable across reload."""
    doc = {
        "format": MODEL_FORMAT,
        "n_trees": model.n_trees,
        "features_per_split": model.features_per_split,
        "min_leaf": model.min_leaf,
        "training_seed": model.training_seed,
        "n_features": model.n_features,
        "feature_names": model.feature_names,
        "trees": model.trees,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, separators=(",", ":"), sort_keys=True)
        fh.write("\n")


def load_model(path) -> ForestModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {doc.get('format')!r}")
    return ForestModel(doc["trees"], doc["n_trees"], doc["features_per_split"],
                       doc["min_leaf"], doc["training_seed"], doc["n_features"],
                       doc.get("feature_names", []))
