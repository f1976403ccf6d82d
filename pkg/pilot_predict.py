"""Pilot: criteria 9 and 10 — regression sanity and cross-graph ranking."""
import time

import numpy as np

from localrank.ingest import (build_full_graph, extract_referrer_subgraph,
                              filter_crawlers, parse_log, sessionize)
from localrank.predictor import (build_jackknife, cross_validate,
                                 permutation_importance, rank_subgraphs,
                                 samples_to_matrix, train_forest)
from localrank.synth import (INTERNAL_DOMAIN, default_profiles,
                             generate_corpus, measured_profiles)

t0 = time.time()
profiles = default_profiles()
corpus = generate_corpus(profiles, seed=7)
records = filter_crawlers(parse_log(iter(corpus.log_lines)).records)
sessions = sessionize(records, 25.0, {INTERNAL_DOMAIN})
G = build_full_graph(sessions)
graphs = [(p.name, extract_referrer_subgraph(sessions, p.domain))
          for p in measured_profiles(profiles)]
print("sizes:", {n: g.node_count for n, g in graphs})
print(f"build: {time.time()-t0:.1f}s")

t0 = time.time()
result = build_jackknife(graphs, samples_per_cell=30,
                         rng=np.random.default_rng(123))
print(f"jackknife: {len(result.samples)} samples, {result.skipped} skipped, "
      f"{time.time()-t0:.1f}s")
X, y = samples_to_matrix(result.samples)
print(f"target tau: mean={y.mean():.4f} var={y.var():.6f} "
      f"min={y.min():.3f} max={y.max():.3f}")
for f in (0.01, 0.05, 0.10, 0.20):
    taus = [s.target_tau for s in result.samples if s.removal_fraction == f]
    print(f"  fraction {f}: mean tau {np.mean(taus):.4f}")

t0 = time.time()
cv = cross_validate(result.samples, folds=5, repeats=10,
                    forest_params={"n_trees": 40}, seed=5)
print(f"cv ({time.time()-t0:.1f}s):")
for k in sorted(cv, key=cv.get):
    print(f"  {k:4s} mse={cv[k]:.3e}  ratio_to_var={cv[k] / y.var():.3f}")

t0 = time.time()
spearmen = []
for seed in range(10):
    model = train_forest(result.samples, n_trees=150, seed=seed)
    ev = rank_subgraphs(model, graphs, G, rng=np.random.default_rng(seed))
    spearmen.append(ev.spearman)
    if seed == 0:
        print("  true taus:", [round(t, 3) for t in ev.true_taus])
        print("  predicted:", [round(t, 3) for t in ev.predicted_taus])
print(f"rank_subgraphs over 10 model seeds ({time.time()-t0:.1f}s): "
      f"spearman mean={np.mean(spearmen):.3f} min={np.min(spearmen):.3f}")
