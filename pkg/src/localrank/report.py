"""End-to-end report: every experiment's CSV plus rendered figures.

Runs the full pipeline on a synthetic corpus (generation, ingestion,
subgraph extraction, pairwise tau matrix, random-surfer curves, growing
rings in full and partial flavors, jackknife regression with importances and
the cross-graph ranking check) and writes each result both as CSV and, where
a curve or bar chart tells the story better, as a PNG figure next to it.

Rendering is deliberately plain matplotlib on the Agg backend with fixed
metadata, so rerunning with the same seed reproduces every byte.
"""
from __future__ import annotations

import csv
import logging
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .features import FEATURE_CATEGORIES, FEATURE_NAMES
from .forest import save_model
from .graph import save_graph_tsv, stats
from .ingest import (build_full_graph, extract_referrer_subgraph,
                     filter_crawlers, parse_log, save_sessions_jsonl,
                     sessionize)
from .pagerank import pagerank, save_ranks_tsv, scores_by_url
from .predictor import (build_jackknife, cross_validate,
                        permutation_importance, rank_subgraphs,
                        save_samples_csv, train_forest)
from .rankcmp import tau_matrix
from .rings import run_rings
from .surfer import surfer_curves
from .synth import (INTERNAL_DOMAIN, default_profiles, generate_corpus,
                    measured_profiles, save_profiles_json)

log = logging.getLogger("localrank.report")

_PNG_META = {"Software": "localrank"}


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _save_figure(fig, path: Path) -> None:
    fig.savefig(path, dpi=130, metadata=_PNG_META)
    plt.close(fig)


def plot_surfer_curves(curves, path: Path) -> None:
    """Mean log-probability gap per browsing step, one line per referrer."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    steps = np.arange(curves.mean_gap.shape[1])
    for i, name in enumerate(curves.graph_names):
        ax1.plot(steps, curves.mean_gap[i], label=name, linewidth=1.2)
        ax2.plot(steps, curves.accuracy[i], linewidth=1.2)
    ax1.set_xlabel("browsing steps")
    ax1.set_ylabel("mean log-probability gap")
    ax2.set_xlabel("browsing steps")
    ax2.set_ylabel("identification accuracy")
    ax2.set_ylim(0, 1.05)
    ax1.legend(fontsize=7)
    fig.tight_layout()
    _save_figure(fig, path)


def plot_ring_taus(per_graph: dict[str, list[float]], path: Path,
                   ylabel="Kendall tau vs global") -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for name, taus in per_graph.items():
        ax.plot(range(len(taus)), taus, marker="o", markersize=3,
                linewidth=1.2, label=name)
    ax.set_xlabel("expansion ring")
    ax.set_ylabel(ylabel)
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save_figure(fig, path)


def plot_partial_expansion(mean_by_percent: dict[float, list[float]],
                           path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for percent in sorted(mean_by_percent):
        taus = mean_by_percent[percent]
        label = "full" if percent == 100.0 else f"top {percent:g}%"
        ax.plot(range(len(taus)), taus, marker="o", markersize=3,
                linewidth=1.2, label=label)
    ax.set_xlabel("expansion ring")
    ax.set_ylabel("mean Kendall tau vs global")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save_figure(fig, path)


def plot_importance(names, values, path: Path, top_n: int = 15) -> None:
    order = np.argsort(values)[::-1][:top_n]
    fig, ax = plt.subplots(figsize=(5.8, 3.8))
    ax.barh(range(len(order)), [values[j] for j in order][::-1])
    ax.set_yticks(range(len(order)))
    ax.set_yticklabels([names[j] for j in order][::-1], fontsize=7)
    ax.set_xlabel("MSE increase when shuffled")
    fig.tight_layout()
    _save_figure(fig, path)


def run_report(
    out: Path,
    seed: int = 0,
    alpha: float = 0.85,
    volume_scale: float = 1.0,
    surfer_runs: int = 100,
    max_steps: int = 20,
    samples_per_cell: int = 10,
    n_trees: int = 150,
    cv_trees: int = 20,
    cv_repeats: int = 3,
    percents=(5.0, 10.0, 30.0, 50.0, 100.0),
    max_rings: int = 10,
    jackknife_scale: float = 1.0,
) -> list[str]:
    """Run the whole pipeline into *out*; returns the artifact file names."""
    out = Path(out)
    artifacts: list[str] = []

    def done(name: str):
        artifacts.append(name)
        log.info("report: wrote %s", name)

    # corpus
    profiles = default_profiles(volume_scale=volume_scale)
    corpus = generate_corpus(profiles, seed=seed)
    corpus.write_log(out / "log.tsv")
    done("log.tsv")
    corpus.write_truth(out / "truth.jsonl")
    done("truth.jsonl")
    save_profiles_json(profiles, out / "profiles.json")
    done("profiles.json")

    # ingest + extract
    records = filter_crawlers(parse_log(iter(corpus.log_lines)).records)
    sessions = sessionize(records, internal_domains={INTERNAL_DOMAIN})
    save_sessions_jsonl(sessions, out / "sessions.jsonl")
    done("sessions.jsonl")
    G = build_full_graph(sessions)
    graph_dir = out / "graphs"
    graph_dir.mkdir(exist_ok=True)
    save_graph_tsv(G, graph_dir / "full.tsv")
    named = [(p.name, extract_referrer_subgraph(sessions, p.domain))
             for p in measured_profiles(profiles)]
    rows = []
    for name, g in [("full", G)] + named:
        if name != "full":
            save_graph_tsv(g, graph_dir / f"{name}.tsv")
        s = stats(g)
        rows.append((name, s.nodes, s.edges, s.density, s.gcc_fraction,
                     s.reciprocity))
    _write_csv(out / "subgraphs.csv",
               ["graph", "nodes", "edges", "density", "gcc_fraction",
                "reciprocity"], rows)
    done("subgraphs.csv")

    # PageRank of the full graph (reference ranking)
    global_rv = pagerank(G, alpha)
    save_ranks_tsv(G, global_rv, out / "global_ranks.tsv")
    done("global_ranks.tsv")
    global_scores = scores_by_url(G, global_rv)

    # pairwise tau matrix
    scored = [("full", global_scores)] + [
        (name, scores_by_url(g, pagerank(g, alpha))) for name, g in named]
    names, mat = tau_matrix(scored)
    _write_csv(out / "tau_matrix.csv", [""] + names,
               [[names[i]] + list(mat[i]) for i in range(len(names))])
    done("tau_matrix.csv")

    # random surfer
    curves = surfer_curves([g for _, g in named], surfer_runs, alpha,
                           max_steps, seed, [n for n, _ in named])
    surfer_rows = []
    for i, name in enumerate(curves.graph_names):
        for step in range(max_steps + 1):
            surfer_rows.append((name, step, curves.mean_gap[i, step],
                                curves.accuracy[i, step]))
    _write_csv(out / "surfer_curves.csv",
               ["true_graph", "step", "mean_gap", "accuracy_at_step"],
               surfer_rows)
    done("surfer_curves.csv")
    plot_surfer_curves(curves, out / "fig_surfer.png")
    done("fig_surfer.png")

    # growing rings, full strategy
    ring_rows = []
    ring_curves: dict[str, list[float]] = {}
    for name, g in named:
        seq = run_rings(G, g, "full", alpha, max_rings, global_scores)
        ring_curves[name] = seq.taus
        for k, tau in enumerate(seq.taus):
            n_k, e_k = seq.ring_sizes[k]
            ring_rows.append((name, seq.strategy, k, n_k, e_k, tau))
    # partial expansion at several percentages
    mean_by_percent: dict[float, list[float]] = {}
    for percent in percents:
        strategy = "full" if percent == 100.0 else f"top:{percent:g}"
        per_ring: list[list[float]] = []
        for name, g in named:
            seq = run_rings(G, g, strategy, alpha, max_rings, global_scores)
            for k, tau in enumerate(seq.taus):
                n_k, e_k = seq.ring_sizes[k]
                if strategy != "full":
                    ring_rows.append((name, seq.strategy, k, n_k, e_k, tau))
                while len(per_ring) <= k:
                    per_ring.append([])
                per_ring[k].append(tau)
        mean_by_percent[percent] = [float(np.mean(v)) for v in per_ring]
    _write_csv(out / "rings.csv",
               ["graph", "strategy", "ring_index", "nodes", "edges", "tau"],
               ring_rows)
    done("rings.csv")
    _write_csv(out / "rings_partial_mean.csv",
               ["percent", "ring_index", "mean_tau"],
               [(p, k, tau) for p in sorted(mean_by_percent)
                for k, tau in enumerate(mean_by_percent[p])])
    done("rings_partial_mean.csv")
    plot_ring_taus(ring_curves, out / "fig_rings.png")
    done("fig_rings.png")
    plot_partial_expansion(mean_by_percent, out / "fig_rings_partial.png")
    done("fig_rings_partial.png")

    # jackknife dataset, forest, CV table, importances, cross-graph ranking
    if jackknife_scale != volume_scale:
        jk_profiles = default_profiles(volume_scale=jackknife_scale)
        jk_corpus = generate_corpus(jk_profiles, seed=seed)
        jk_records = filter_crawlers(parse_log(iter(jk_corpus.log_lines)).records)
        jk_sessions = sessionize(jk_records, internal_domains={INTERNAL_DOMAIN})
        jk_G = build_full_graph(jk_sessions)
        jk_named = [(p.name, extract_referrer_subgraph(jk_sessions, p.domain))
                    for p in measured_profiles(jk_profiles)]
    else:
        jk_G, jk_named = G, named
    rng = np.random.default_rng(seed)
    result = build_jackknife(jk_named, samples_per_cell=samples_per_cell,
                             alpha=alpha, rng=rng)
    save_samples_csv(result.samples, out / "jackknife_samples.csv")
    done("jackknife_samples.csv")

    model = train_forest(result.samples, n_trees=n_trees, seed=seed)
    save_model(model, out / "model.json")
    done("model.json")

    cv = cross_validate(result.samples, 5, cv_repeats,
                        {"n_trees": cv_trees}, seed)
    counts = {"ALL": len(FEATURE_NAMES),
              **{c: FEATURE_CATEGORIES.count(c) for c in "SADWPC"}}
    order = sorted((k for k in cv if k != "ALL"), key=lambda k: cv[k])
    _write_csv(out / "cv_mse.csv", ["feature_class", "n_features", "mse"],
               [(k, counts[k], cv[k]) for k in order]
               + [("ALL", counts["ALL"], cv["ALL"])])
    done("cv_mse.csv")

    imp = permutation_importance(model, result.samples, repeats=5, seed=seed)
    imp_order = np.argsort(-imp)
    _write_csv(out / "importance.csv", ["feature", "category", "mse_increase"],
               [(FEATURE_NAMES[j], FEATURE_CATEGORIES[j], float(imp[j]))
                for j in imp_order])
    done("importance.csv")
    plot_importance(list(FEATURE_NAMES), imp, out / "fig_importance.png")
    done("fig_importance.png")

    evaluation = rank_subgraphs(model, jk_named, jk_G, alpha,
                                rng=np.random.default_rng(seed))
    _write_csv(out / "rank_eval.csv",
               ["graph", "true_tau", "predicted_tau"],
               list(zip(evaluation.graph_names, evaluation.true_taus,
                        evaluation.predicted_taus)))
    done("rank_eval.csv")
    _write_csv(out / "rank_eval_summary.csv",
               ["spearman", "kendall", "tied_prediction"],
               [(evaluation.spearman, evaluation.kendall,
                 int(evaluation.tied_prediction))])
    done("rank_eval_summary.csv")

    return artifacts
