"""Command-line entry point: one subcommand per pipeline stage.

Every subcommand writes its artifacts into an output directory (flag
`--out`, environment variable LOCALRANK_OUT, or ./out/<subcommand>) together
with a `config.json` echo of the resolved parameters, so a run can always be
reproduced from its outputs.  All numbers are written as shortest
round-trippable decimals and rows in a fixed order; rerunning any subcommand
with the same inputs and seed produces byte-identical files.

Exit codes: 2 usage/config errors (argparse), 3 missing input, 4 malformed
input, 5 computation errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .graph import BrowseGraph, load_graph_tsv, save_graph_tsv, stats
from .ingest import (DEFAULT_TIMEOUT_MINUTES, build_full_graph,
                     extract_referrer_subgraph, filter_crawlers,
                     load_sessions_jsonl, parse_log, save_sessions_jsonl,
                     sessionize)
from .pagerank import DEFAULT_ALPHA, DEFAULT_MAX_ITER, DEFAULT_TOL, pagerank, \
    save_ranks_tsv, scores_by_url
from .rankcmp import tau_matrix
from .rings import DEFAULT_MAX_RINGS, make_initial_sets, run_rings
from .surfer import DEFAULT_MAX_STEPS, surfer_curves
from .features import (DEFAULT_CLOSENESS_SAMPLE, FEATURE_CATEGORIES,
                       FEATURE_NAMES, extract_features)
from .forest import load_model, save_model
from .predictor import (DEFAULT_FRACTIONS, DEFAULT_SAMPLES_PER_CELL,
                        build_jackknife, cross_validate, load_samples_csv,
                        permutation_importance, rank_subgraphs,
                        samples_to_matrix, save_samples_csv, train_forest)
from .synth import (DEFAULT_PAGES_PER_TOPIC, INTERNAL_DOMAIN,
                    default_profiles, generate_corpus, load_profiles_json,
                    measured_profiles, save_profiles_json)

log = logging.getLogger("localrank")

EXIT_MISSING_INPUT = 3
EXIT_MALFORMED = 4
EXIT_COMPUTE = 5


class MalformedInputError(Exception):
    """An input file exists but cannot be parsed."""


def _fmt(value) -> str:
    """Locale-independent, shortest round-trippable cell text."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _out_dir(args, subcommand: str) -> Path:
    base = args.out or os.environ.get("LOCALRANK_OUT") or f"out/{subcommand}"
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _echo_config(out: Path, args,
                 skip=("func", "out", "config", "verbose")) -> None:
    """Resolved parameters (computation inputs only) echoed for provenance."""
    doc = {k: v for k, v in sorted(vars(args).items())
           if k not in skip and not callable(v)}
    doc["version"] = __version__
    with open(out / "config.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Merge --config JSON under explicit flags (flags win)."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        parser.error(f"config file not found: {args.config}")
    except json.JSONDecodeError as exc:
        parser.error(f"config file is not valid JSON: {exc}")
    defaults = {a.dest: a.default for a in parser._actions}
    for key, value in doc.items():
        if key in ("config",) or not hasattr(args, key):
            continue
        if getattr(args, key) == defaults.get(key):
            setattr(args, key, value)


def _load_graph_checked(path) -> BrowseGraph:
    if not Path(path).exists():
        raise FileNotFoundError(path)
    try:
        return load_graph_tsv(path)
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from exc


def _named_graphs(paths) -> list[tuple[str, BrowseGraph]]:
    out = []
    for p in paths:
        out.append((Path(p).stem, _load_graph_checked(p)))
    return out


def _graph_dir(path: str) -> list[tuple[str, BrowseGraph]]:
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(path)
    files = sorted(root.glob("*.tsv"))
    if not files:
        raise FileNotFoundError(f"no .tsv graphs in {path}")
    named = [(f.stem, _load_graph_checked(f)) for f in files]
    # keep the full graph (when present) first, like the published layout
    named.sort(key=lambda kv: (kv[0] != "full", kv[0]))
    return named


# ---- subcommand implementations -------------------------------------------------

def cmd_synth(args):
    out = _out_dir(args, "synth")
    if args.profiles:
        profiles, pages_per_topic = load_profiles_json(args.profiles)
    else:
        profiles = default_profiles(volume_scale=args.volume_scale)
        pages_per_topic = args.pages_per_topic
    corpus = generate_corpus(profiles, pages_per_topic, args.seed)
    corpus.write_log(out / "log.tsv")
    corpus.write_truth(out / "truth.jsonl")
    save_profiles_json(profiles, out / "profiles.json", pages_per_topic)
    _echo_config(out, args)
    log.info("synth: %d sessions, %d log lines -> %s",
             len(corpus.sessions), len(corpus.log_lines), out)


def cmd_ingest(args):
    out = _out_dir(args, "ingest")
    if not Path(args.log).exists():
        raise FileNotFoundError(args.log)
    with open(args.log, encoding="utf-8") as fh:
        parsed = parse_log(fh)
    records = filter_crawlers(parsed.records)
    internal = {d.strip() for d in args.internal_domains.split(",") if d.strip()}
    sessions = sessionize(records, args.timeout_min, internal)
    save_sessions_jsonl(sessions, out / "sessions.jsonl")
    _echo_config(out, args)
    log.info("ingest: %d records (%d malformed, %d after crawler filter), "
             "%d sessions -> %s", len(parsed.records) + parsed.malformed,
             parsed.malformed, len(records), len(sessions), out)


def cmd_extract(args):
    out = _out_dir(args, "extract")
    if not Path(args.sessions).exists():
        raise FileNotFoundError(args.sessions)
    sessions = load_sessions_jsonl(args.sessions)
    full = build_full_graph(sessions)
    save_graph_tsv(full, out / "full.tsv")
    written = ["full"]
    if args.referrer:
        domains = [d.strip() for d in args.referrer.split(",")]
    else:
        counts: dict[str, int] = {}
        for s in sessions:
            counts[s.initial_referrer_domain] = counts.get(s.initial_referrer_domain, 0) + 1
        domains = sorted(d for d, c in counts.items() if c >= args.min_sessions)
    for domain in domains:
        g = extract_referrer_subgraph(sessions, domain)
        save_graph_tsv(g, out / f"{domain}.tsv")
        written.append(domain)
    rows = []
    for name in written:
        g = load_graph_tsv(out / f"{name}.tsv")
        s = stats(g)
        rows.append((name, s.nodes, s.edges, s.density, s.gcc_fraction,
                     s.reciprocity))
    _write_csv(out / "subgraphs.csv",
               ["graph", "nodes", "edges", "density", "gcc_fraction",
                "reciprocity"], rows)
    _echo_config(out, args)
    log.info("extract: wrote %d graphs -> %s", len(written), out)


def cmd_pagerank(args):
    out = _out_dir(args, "pagerank")
    g = _load_graph_checked(args.graph)
    rv = pagerank(g, args.alpha, args.tol, args.max_iter)
    save_ranks_tsv(g, rv, out / "ranks.tsv")
    _echo_config(out, args)
    log.info("pagerank: %d nodes, %d iterations, residual %.3e%s -> %s",
             g.node_count, rv.iterations_used, rv.residual,
             "" if rv.converged else " (NOT converged)", out)


def cmd_tau_matrix(args):
    out = _out_dir(args, "tau-matrix")
    if not args.graphs and not args.graph_files:
        raise ValueError("tau-matrix needs --graphs DIR or graph files")
    named = _graph_dir(args.graphs) if args.graphs else _named_graphs(args.graph_files)
    scored = [(name, scores_by_url(g, pagerank(g, args.alpha)))
              for name, g in named]
    names, mat = tau_matrix(scored)
    rows = [[names[i]] + [mat[i, j] for j in range(len(names))]
            for i in range(len(names))]
    _write_csv(out / "tau_matrix.csv", [""] + names, rows)
    _echo_config(out, args)
    log.info("tau-matrix: %dx%d -> %s", len(names), len(names), out)


def cmd_surfer(args):
    out = _out_dir(args, "surfer")
    named = _graph_dir(args.candidates)
    curves = surfer_curves([g for _, g in named], args.runs, args.alpha,
                           args.max_steps, args.seed,
                           [n for n, _ in named], args.n_mode)
    rows = []
    for i, name in enumerate(curves.graph_names):
        for step in range(args.max_steps + 1):
            rows.append((name, step, curves.mean_gap[i, step],
                         curves.accuracy[i, step]))
    _write_csv(out / "surfer_curves.csv",
               ["true_graph", "step", "mean_gap", "accuracy_at_step"], rows)
    _echo_config(out, args)
    log.info("surfer: %d graphs x %d runs x %d steps -> %s",
             len(named), args.runs, args.max_steps, out)


def _parse_strategy(text: str) -> str:
    if text == "full":
        return "full"
    if text.startswith("top:"):
        return text
    raise ValueError(f"unknown strategy {text!r} (use full or top:<percent>)")


def cmd_rings(args):
    out = _out_dir(args, "rings")
    G = _load_graph_checked(args.global_graph)
    locals_named = _graph_dir(args.locals)
    locals_named = [(n, g) for n, g in locals_named if n != "full"]
    strategy = _parse_strategy(args.strategy)
    rng = np.random.default_rng(args.seed)
    global_scores = scores_by_url(G, pagerank(G, args.alpha))

    if args.regime == "RB":
        h0s = [(name, g) for name, g in locals_named]
    else:
        sets = make_initial_sets(G, locals_named, args.regime,
                                 args.target_size, rng)
        h0s = [(name, nodes) for name, nodes in sets]

    rows = []
    for name, h0 in h0s:
        seq = run_rings(G, h0, strategy, args.alpha, args.max_rings,
                        global_scores)
        for k, tau in enumerate(seq.taus):
            nodes, edges = seq.ring_sizes[k]
            rows.append((name, seq.strategy, k, nodes, edges, tau))
    _write_csv(out / "rings.csv",
               ["graph", "strategy", "ring_index", "nodes", "edges", "tau"],
               rows)
    _echo_config(out, args)
    log.info("rings: %d locals, regime %s, strategy %s -> %s",
             len(h0s), args.regime, strategy, out)


def cmd_features(args):
    out = _out_dir(args, "features")
    if args.schema:
        _write_csv(out / "schema.csv", ["name", "category"],
                   list(zip(FEATURE_NAMES, FEATURE_CATEGORIES)))
        for name, cat in zip(FEATURE_NAMES, FEATURE_CATEGORIES):
            print(f"{name},{cat}")
        _echo_config(out, args)
        return
    named = _graph_dir(args.graphs)
    rng = np.random.default_rng(args.seed)
    rows = []
    for name, g in named:
        rv = pagerank(g, args.alpha)
        fv = extract_features(g, rv, args.closeness_sample, rng)
        rows.append([name] + [float(v) for v in fv.values])
    _write_csv(out / "features.csv", ["graph", *FEATURE_NAMES], rows)
    _echo_config(out, args)
    log.info("features: %d graphs x %d features -> %s",
             len(named), len(FEATURE_NAMES), out)


def cmd_jackknife(args):
    out = _out_dir(args, "jackknife")
    named = _graph_dir(args.graphs)
    named = [(n, g) for n, g in named if n != "full"]
    fractions = [float(f) for f in args.fractions.split(",")]
    result = build_jackknife(named, fractions, args.samples_per_cell,
                             args.alpha, np.random.default_rng(args.seed),
                             args.closeness_sample)
    save_samples_csv(result.samples, out / "samples.csv")
    _echo_config(out, args)
    log.info("jackknife: %d samples (%d skipped) -> %s",
             len(result.samples), result.skipped, out)


def _train_common(args, out: Path, samples_path: str):
    if not Path(samples_path).exists():
        raise FileNotFoundError(samples_path)
    try:
        samples = load_samples_csv(samples_path)
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from exc
    model = train_forest(samples, args.n_trees, args.features_per_split,
                         args.min_leaf, args.seed)
    save_model(model, out / "model.json")
    log.info("train: %d samples -> forest of %d trees", len(samples),
             args.n_trees)

    if args.cv_report or args.report_name:
        cv = cross_validate(samples, args.cv_folds, args.cv_repeats,
                            {"n_trees": args.cv_trees,
                             "min_leaf": args.min_leaf},
                            args.seed)
        counts = {"ALL": len(FEATURE_NAMES)}
        for cat in "SADWPC":
            counts[cat] = FEATURE_CATEGORIES.count(cat)
        order = sorted((k for k in cv if k != "ALL"), key=lambda k: cv[k])
        rows = [(k, counts[k], cv[k]) for k in order]
        rows.append(("ALL", counts["ALL"], cv["ALL"]))
        _write_csv(out / "cv_mse.csv", ["feature_class", "n_features", "mse"],
                   rows)
        log.info("train: cross-validation table written")

    if args.importance or args.importance_name:
        imp = permutation_importance(model, samples, args.importance_repeats,
                                     args.seed)
        order = np.argsort(-imp)
        rows = [(FEATURE_NAMES[j], FEATURE_CATEGORIES[j], float(imp[j]))
                for j in order]
        _write_csv(out / "importance.csv",
                   ["feature", "category", "mse_increase"], rows)
        log.info("train: permutation importance written")
    return model


def cmd_train(args):
    out = _out_dir(args, "train")
    _train_common(args, out, args.samples)
    _echo_config(out, args)


def cmd_predict_tau(args):
    # alternate spelling: --train/--report/--importance file arguments
    out = _out_dir(args, "predict-tau")
    args.cv_report = bool(args.report_name)
    args.importance = bool(args.importance_name)
    _train_common(args, out, args.train)
    if args.report_name:
        os.replace(out / "cv_mse.csv", out / args.report_name)
    if args.importance_name:
        os.replace(out / "importance.csv", out / args.importance_name)
    _echo_config(out, args)


def cmd_report(args):
    from . import report as report_mod
    out = _out_dir(args, "report")
    result = report_mod.run_report(
        out,
        seed=args.seed,
        alpha=args.alpha,
        volume_scale=args.volume_scale,
        surfer_runs=args.runs,
        max_steps=args.max_steps,
        samples_per_cell=args.samples_per_cell,
        n_trees=args.n_trees,
        cv_trees=args.cv_trees,
        cv_repeats=args.cv_repeats,
        percents=[float(p) for p in args.percents.split(",")],
        max_rings=args.max_rings,
        jackknife_scale=args.jackknife_scale,
    )
    _echo_config(out, args)
    log.info("report: %d artifacts -> %s", len(result), out)


# ---- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localrank",
        description="Local ranking experiments on browse graphs")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug-level progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", help="output directory "
                       "(default $LOCALRANK_OUT or ./out/<cmd>)")
        p.add_argument("--config", help="JSON config file; explicit flags win")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("synth", help="generate a synthetic browsing log")
    common(p)
    p.add_argument("--profiles", help="profile config JSON (default: builtin)")
    p.add_argument("--pages-per-topic", type=int, default=DEFAULT_PAGES_PER_TOPIC)
    p.add_argument("--volume-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse and sessionize a pageview log")
    common(p, seed=False)
    p.add_argument("--log", required=True)
    p.add_argument("--timeout-min", type=float, default=DEFAULT_TIMEOUT_MINUTES)
    p.add_argument("--internal-domains", default=INTERNAL_DOMAIN,
                   help="comma-separated registered domains of the portal")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="referrer subgraphs from sessions")
    common(p, seed=False)
    p.add_argument("--sessions", required=True)
    p.add_argument("--referrer", help="comma-separated referrer domains "
                   "(default: every domain above --min-sessions)")
    p.add_argument("--min-sessions", type=int, default=1)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("pagerank", help="weighted PageRank of one graph")
    common(p, seed=False)
    p.add_argument("--graph", required=True)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.set_defaults(func=cmd_pagerank)

    p = sub.add_parser("tau-matrix", help="pairwise Kendall tau of graphs")
    common(p, seed=False)
    p.add_argument("--graphs", help="directory of graph .tsv files")
    p.add_argument("graph_files", nargs="*", help="explicit graph files")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.set_defaults(func=cmd_tau_matrix)

    p = sub.add_parser("surfer", help="random-surfer referrer identification")
    common(p)
    p.add_argument("--candidates", required=True,
                   help="directory of candidate graph .tsv files")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--n-mode", choices=["universe", "per_graph"],
                   default="universe")
    p.set_defaults(func=cmd_surfer)

    p = sub.add_parser("rings", help="growing-rings expansion experiment")
    common(p)
    p.add_argument("--global", dest="global_graph", required=True,
                   help="full graph .tsv")
    p.add_argument("--locals", required=True, help="directory of local graphs")
    p.add_argument("--regime", choices=["RB", "SRB", "R"], default="RB")
    p.add_argument("--strategy", default="full",
                   help="full or top:<percent> (e.g. top:5)")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--max-rings", type=int, default=DEFAULT_MAX_RINGS)
    p.add_argument("--target-size", type=int, help="SRB sample size")
    p.set_defaults(func=cmd_rings)

    p = sub.add_parser("features", help="62 structural metrics per graph")
    common(p)
    p.add_argument("--graphs", help="directory of graph .tsv files")
    p.add_argument("--schema", action="store_true",
                   help="print the frozen name/category table and exit")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--closeness-sample", type=int,
                   default=DEFAULT_CLOSENESS_SAMPLE)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("jackknife", help="node-deletion training set")
    common(p)
    p.add_argument("--graphs", required=True)
    p.add_argument("--fractions", default=",".join(str(f) for f in DEFAULT_FRACTIONS))
    p.add_argument("--samples-per-cell", type=int,
                   default=DEFAULT_SAMPLES_PER_CELL)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--closeness-sample", type=int, default=64)
    p.set_defaults(func=cmd_jackknife)

    def train_flags(p):
        p.add_argument("--n-trees", type=int, default=500)
        p.add_argument("--features-per-split", type=int)
        p.add_argument("--min-leaf", type=int, default=2)
        p.add_argument("--cv-folds", type=int, default=5)
        p.add_argument("--cv-repeats", type=int, default=10)
        p.add_argument("--cv-trees", type=int, default=20,
                       help="forest size inside cross-validation")
        p.add_argument("--importance-repeats", type=int, default=10)

    p = sub.add_parser("train", help="train the tau-prediction forest")
    common(p)
    p.add_argument("--samples", required=True, help="jackknife samples CSV")
    p.add_argument("--cv-report", action="store_true",
                   help="also write the per-category CV MSE table")
    p.add_argument("--importance", action="store_true",
                   help="also write permutation importances")
    train_flags(p)
    p.set_defaults(func=cmd_train, report_name=None, importance_name=None)

    p = sub.add_parser("predict-tau", help="train + report (file-name spelling)")
    common(p)
    p.add_argument("--train", required=True, help="jackknife samples CSV")
    p.add_argument("--report", dest="report_name",
                   help="CV MSE table file name inside --out")
    p.add_argument("--importance", dest="importance_name",
                   help="importance CSV file name inside --out")
    train_flags(p)
    p.set_defaults(func=cmd_predict_tau)

    p = sub.add_parser("report", help="full pipeline with CSVs and figures")
    common(p)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--volume-scale", type=float, default=1.0)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--samples-per-cell", type=int, default=10)
    p.add_argument("--n-trees", type=int, default=150)
    p.add_argument("--cv-trees", type=int, default=20)
    p.add_argument("--cv-repeats", type=int, default=3)
    p.add_argument("--percents", default="5,10,30,50,100")
    p.add_argument("--max-rings", type=int, default=DEFAULT_MAX_RINGS)
    p.add_argument("--jackknife-scale", type=float, default=1.0,
                   help="volume multiplier for the jackknife suite")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    subparser = None
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            subparser = action.choices[args.command]
    _apply_config_file(args, subparser or parser)
    try:
        args.func(args)
    except FileNotFoundError as exc:
        log.error("missing input: %s", exc)
        return EXIT_MISSING_INPUT
    except (MalformedInputError, json.JSONDecodeError) as exc:
        log.error("malformed input: %s", exc)
        return EXIT_MALFORMED
    except Exception as exc:
        log.error("failed: %s", exc)
        return EXIT_COMPUTE
    return 0


if __name__ == "__main__":
    sys.exit(main())
