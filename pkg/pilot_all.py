"""Pilot for the default config: criteria 5, 6, 7 key numbers."""
import time

import numpy as np

from localrank.ingest import (build_full_graph, extract_referrer_subgraph,
                              filter_crawlers, parse_log, sessionize)
from localrank.pagerank import pagerank, scores_by_url
from localrank.rankcmp import rank_agreement
from localrank.rings import run_rings
from localrank.surfer import surfer_curves
from localrank.synth import (INTERNAL_DOMAIN, default_profiles,
                             generate_corpus, measured_profiles)


def build(seed, scale=1.0):
    profiles = default_profiles(volume_scale=scale)
    corpus = generate_corpus(profiles, seed=seed)
    records = filter_crawlers(parse_log(iter(corpus.log_lines)).records)
    sessions = sessionize(records, 25.0, {INTERNAL_DOMAIN})
    G = build_full_graph(sessions)
    graphs = [(p.name, extract_referrer_subgraph(sessions, p.domain))
              for p in measured_profiles(profiles)]
    return G, graphs


t0 = time.time()
G, graphs = build(7)
print(f"full graph: {G.node_count} nodes {G.edge_count} edges")
for name, g in graphs:
    print(f"  {name:10s} nodes={g.node_count:5d} edges={g.edge_count:6d} "
          f"frac={g.node_count / G.node_count:.2f}")
print(f"build: {time.time()-t0:.1f}s")

print("\n-- pairwise tau sanity (should be < 0.9, common >= 2) --")
scored = {name: scores_by_url(g, pagerank(g)) for name, g in graphs}
names = list(scored)
worst_common = 10**9
max_tau = -2
for i in range(len(names)):
    for j in range(i + 1, len(names)):
        a = rank_agreement(scored[names[i]], scored[names[j]])
        worst_common = min(worst_common, a.common_nodes)
        max_tau = max(max_tau, a.kendall_tau)
print(f"min common nodes: {worst_common}, max pairwise tau: {max_tau:.3f}")

print("\n-- criterion 5: surfer --")
t0 = time.time()
curves = surfer_curves([g for _, g in graphs], runs=100, max_steps=20, seed=42,
                       graph_names=[n for n, _ in graphs])
acc = curves.accuracy
print(f"surfer: {time.time()-t0:.1f}s")
print("acc@3:", np.round(acc[:, 3], 3), "mean:", acc[:, 3].mean().round(3))
print("acc@20:", np.round(acc[:, 20], 3), "min:", acc[:, 20].min().round(3))

print("\n-- criterion 6: full expansion --")
t0 = time.time()
gs = scores_by_url(G, pagerank(G))
for name, g in graphs:
    seq = run_rings(G, g, "full", global_scores=gs)
    covers = len(seq.rings[-1]) == G.node_count
    first95 = next((i for i, t in enumerate(seq.taus) if t >= 0.95), None)
    print(f"  {name:10s} rings={len(seq.rings)} sat={seq.saturated} "
          f"covers={covers} tau95_at={first95} "
          f"taus={[round(t, 3) for t in seq.taus]}")
print(f"time: {time.time()-t0:.1f}s")

print("\n-- criterion 7: directional orderings over 20 seeds --")
t0 = time.time()
wins_r1, wins_final = 0, 0
for seed in range(20):
    G, graphs = build(seed, scale=0.6)
    gs = scores_by_url(G, pagerank(G))
    r1f, r1t, ff, ft = [], [], [], []
    for name, g in graphs:
        sf = run_rings(G, g, "full", global_scores=gs)
        st = run_rings(G, g, "top:5", global_scores=gs)
        if len(sf.taus) > 1 and len(st.taus) > 1:
            r1f.append(sf.taus[1])
            r1t.append(st.taus[1])
        ff.append(sf.taus[-1])
        ft.append(st.taus[-1])
    win1 = np.mean(r1t) > np.mean(r1f)
    win2 = np.mean(ff) > np.mean(ft)
    wins_r1 += win1
    wins_final += win2
    print(f"  seed {seed:2d}: ring1 top5={np.mean(r1t):.3f} full={np.mean(r1f):.3f} "
          f"{'TOP5' if win1 else 'full'} | final full={np.mean(ff):.3f} "
          f"top5={np.mean(ft):.3f}")
print(f"wins: top5@ring1 {wins_r1}/20 (need >=15), full@final {wins_final}/20")
print(f"time: {time.time()-t0:.1f}s")
