"""Pilot: criterion 5 — surfer accuracy on the default corpus."""
import time

import numpy as np

from localrank.ingest import filter_crawlers, parse_log, sessionize, extract_referrer_subgraph
from localrank.surfer import surfer_curves
from localrank.synth import INTERNAL_DOMAIN, default_profiles, generate_corpus

t0 = time.time()
profiles = default_profiles()
corpus = generate_corpus(profiles, seed=7)
records = filter_crawlers(parse_log(iter(corpus.log_lines)).records)
sessions = sessionize(records, 25.0, {INTERNAL_DOMAIN})
graphs = []
for p in profiles:
    g = extract_referrer_subgraph(sessions, p.domain)
    graphs.append((p.name, g))
    print(f"{p.name:10s} nodes={g.node_count:5d} edges={g.edge_count:6d}")
print(f"build: {time.time()-t0:.1f}s")

t0 = time.time()
curves = surfer_curves([g for _, g in graphs], runs=100, max_steps=20, seed=42,
                       graph_names=[n for n, _ in graphs])
print(f"surfer: {time.time()-t0:.1f}s")
acc = curves.accuracy
print("accuracy at step 3:", np.round(acc[:, 3], 3), "mean:", acc[:, 3].mean().round(3))
print("accuracy at step 20:", np.round(acc[:, 20], 3), "min:", acc[:, 20].min().round(3))
print("mean gap at steps 1,3,10,20:")
for i, (name, _) in enumerate(graphs):
    print(f"  {name:10s}", np.round(curves.mean_gap[i, [1, 3, 10, 20]], 2))
