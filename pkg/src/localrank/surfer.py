"""Referrer identification from a random surfer's trace.

A surfer walks one browse graph (following weighted out-edges with
probability alpha, teleporting uniformly otherwise).  An observer who sees
only the visited URLs scores every candidate graph by the log-likelihood of
the observed steps and identifies the graph once the best candidate leads the
runner-up by a margin, or after a maximum number of steps.

The per-step likelihood of moving from page x to page y under candidate
graph G is

    (1 - alpha) / n  (+ alpha * P_G(x, y) when y is a successor of x in G)

and a flat 1 / n when x is unknown to G or has no out-edges there.  `n` is by
default the size of the URL universe spanned by all candidates together; a
per-candidate graph size can be chosen instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .graph import BrowseGraph
from .pagerank import DEFAULT_ALPHA

__all__ = ["SurferTrace", "SurferVerdict", "SurferCurves", "walk_step",
           "step_likelihood", "identify_referrer", "surfer_curves",
           "DEFAULT_MARGIN", "DEFAULT_MAX_STEPS"]

DEFAULT_MAX_STEPS = 20
DEFAULT_MARGIN = math.log(2.0)

NMode = Literal["universe", "per_graph"]


@dataclass
class SurferTrace:
    """What the observer accumulated while watching one walk."""

    true_graph_index: int
    visited: list[str]
    log_probs: np.ndarray
    history: list[np.ndarray]  # log_probs snapshot after each step; [0] is all-zero


@dataclass(frozen=True)
class SurferVerdict:
    identified_index: int
    steps_taken: int
    margin: float
    correct: bool


@dataclass
class SurferCurves:
    """Per-step identification diagnostics averaged over repeated walks."""

    graph_names: list[str]
    mean_gap: np.ndarray       # (graphs, steps+1); column 0 is the zero baseline
    accuracy: np.ndarray       # (graphs, steps+1); fraction of runs won by the truth
    raw_gap: np.ndarray        # (graphs, runs, steps+1)


def walk_step(g: BrowseGraph, current: int, alpha: float,
              rng: np.random.Generator) -> int:
    """One move of the surfer on *g* starting from node *current*.

    With probability alpha (and out-edges available) follows an out-edge
    proportionally to its weight; otherwise teleports uniformly.
    """
    if g.node_count == 0:
        raise ValueError("cannot walk on an empty graph")
    g._check_node(current)
    strength = g.out_strength[current]
    if strength > 0 and rng.random() < alpha:
        dsts, wts = g.out_edges(current)
        r = rng.random() * strength
        idx = int(np.searchsorted(np.cumsum(wts), r, side="right"))
        return int(dsts[min(idx, dsts.size - 1)])
    return int(rng.integers(g.node_count))


def step_likelihood(g: BrowseGraph, x_prev: str, x_next: str, alpha: float,
                    n_universe: int) -> float:
    """Probability that candidate *g* produced the observed step x_prev->x_next.

    Falls back to the flat 1/n when x_prev is absent or dangling in *g*.
    Always in (0, 1].
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if n_universe < 1:
        raise ValueError("n_universe must be >= 1")
    u = g.node_id(x_prev)
    if u is None or g.out_strength[u] == 0.0:
        return 1.0 / n_universe
    p = (1.0 - alpha) / n_universe
    v = g.node_id(x_next)
    if v is not None:
        w = g.edge_weight(u, v)
        if w:
            p += alpha * (w / g.out_strength[u])
    return p


def _universe_size(candidates: Sequence[BrowseGraph]) -> int:
    urls: set[str] = set()
    for g in candidates:
        urls.update(g.urls)
    return len(urls)


def identify_referrer(
    candidates: Sequence[BrowseGraph],
    true_index: int,
    alpha: float = DEFAULT_ALPHA,
    max_steps: int = DEFAULT_MAX_STEPS,
    margin_threshold: float | None = DEFAULT_MARGIN,
    rng: np.random.Generator | None = None,
    n_mode: NMode = "universe",
) -> tuple[SurferTrace, SurferVerdict]:
    """Walk the true graph and score all candidates step by step.

    The walk starts at a uniformly random node of the true graph.  After each
    step every candidate's running log-likelihood is updated; the experiment
    stops early once the leader's advantage over the runner-up reaches
    *margin_threshold* (never before step 1), or at *max_steps*.  Pass
    ``margin_threshold=None`` to disable early stopping.
    """
    if not candidates:
        raise ValueError("need at least one candidate graph")
    if not 0 <= true_index < len(candidates):
        raise ValueError("true_index out of range")
    rng = np.random.default_rng() if rng is None else rng
    true_g = candidates[true_index]
    if true_g.node_count == 0:
        raise ValueError("true graph is empty")

    k = len(candidates)
    if n_mode == "universe":
        n_uni = _universe_size(candidates)
        n_per = [n_uni] * k
    else:
        n_per = [g.node_count for g in candidates]

    log_probs = np.zeros(k)
    history = [log_probs.copy()]
    current = int(rng.integers(true_g.node_count))
    visited = [true_g.url(current)]
    steps_taken = 0
    margin = math.inf
    for _ in range(max_steps):
        nxt = walk_step(true_g, current, alpha, rng)
        u_prev, u_next = true_g.url(current), true_g.url(nxt)
        for i, g in enumerate(candidates):
            log_probs[i] += math.log(
                step_likelihood(g, u_prev, u_next, alpha, n_per[i]))
        visited.append(u_next)
        history.append(log_probs.copy())
        current = nxt
        steps_taken += 1
        if k >= 2:
            top2 = np.partition(log_probs, -2)[-2:]
            margin = float(top2[1] - top2[0])
        if margin_threshold is not None and margin >= margin_threshold:
            break

    identified = int(np.argmax(log_probs))
    trace = SurferTrace(true_index, visited, log_probs, history)
    verdict = SurferVerdict(identified, steps_taken, margin,
                            identified == true_index)
    return trace, verdict


def trace_gaps(trace: SurferTrace) -> np.ndarray:
    """Per-step gap log p_true - max over other candidates (0 at step 0)."""
    k = trace.log_probs.size
    gaps = np.zeros(len(trace.history))
    if k < 2:
        return gaps
    for s, snapshot in enumerate(trace.history):
        others = np.delete(snapshot, trace.true_graph_index)
        gaps[s] = snapshot[trace.true_graph_index] - others.max()
    return gaps


def surfer_curves(
    candidates: Sequence[BrowseGraph],
    runs: int,
    alpha: float = DEFAULT_ALPHA,
    max_steps: int = DEFAULT_MAX_STEPS,
    seed: int = 0,
    graph_names: Sequence[str] | None = None,
    n_mode: NMode = "universe",
) -> SurferCurves:
    """Mean log-probability gap and accuracy per step, per true graph.

    Each (true graph, run) pair gets an independent RNG stream derived from
    *seed*, so results do not depend on scheduling.  Walks always run the
    full *max_steps* (no early stop) to produce complete curves.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    k = len(candidates)
    names = list(graph_names) if graph_names is not None else [
        f"g{i}" for i in range(k)]
    raw = np.zeros((k, runs, max_steps + 1))
    correct = np.zeros((k, runs, max_steps + 1))
    streams = np.random.SeedSequence(seed).spawn(k * runs)
    for t in range(k):
        for r in range(runs):
            rng = np.random.default_rng(streams[t * runs + r])
            trace, _ = identify_referrer(
                candidates, t, alpha, max_steps, None, rng, n_mode)
            raw[t, r] = trace_gaps(trace)
            for s, snapshot in enumerate(trace.history):
                correct[t, r, s] = 1.0 if int(np.argmax(snapshot)) == t else 0.0
    # before any observation the identification is a k-way coin toss
    correct[:, :, 0] = 1.0 / k
    return SurferCurves(names, raw.mean(axis=1), correct.mean(axis=1), raw)
