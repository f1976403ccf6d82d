"""Pilot: criteria 6 and 7 — rings saturation and partial-expansion ordering."""
import time

import numpy as np

from localrank.ingest import filter_crawlers, parse_log, sessionize, extract_referrer_subgraph
from localrank.pagerank import pagerank, scores_by_url
from localrank.rings import run_rings
from localrank.synth import INTERNAL_DOMAIN, default_profiles, generate_corpus


def build(seed, scale=1.0):
    profiles = default_profiles(volume_scale=scale)
    corpus = generate_corpus(profiles, seed=seed)
    records = filter_crawlers(parse_log(iter(corpus.log_lines)).records)
    sessions = sessionize(records, 25.0, {INTERNAL_DOMAIN})
    from localrank.ingest import build_full_graph
    G = build_full_graph(sessions)
    graphs = [(p.name, extract_referrer_subgraph(sessions, p.domain))
              for p in profiles]
    return G, graphs


t0 = time.time()
G, graphs = build(7)
print(f"full graph: {G.node_count} nodes {G.edge_count} edges")
global_scores = scores_by_url(G, pagerank(G))

print("\n-- criterion 6: full-strategy expansion --")
for name, g in graphs:
    seq = run_rings(G, g, "full", global_scores=global_scores)
    sat = "sat" if seq.saturated else "cap"
    covers = len(seq.rings[-1]) == G.node_count
    print(f"{name:10s} rings={len(seq.rings)} {sat} covers_full={covers} "
          f"taus={[round(t, 3) for t in seq.taus]}")
print(f"time: {time.time()-t0:.1f}s")

print("\n-- criterion 7: top-5% vs full at ring 1 and final (per seed) --")
t0 = time.time()
wins_r1, wins_final = 0, 0
n_seeds = 20
for seed in range(n_seeds):
    G, graphs = build(seed, scale=0.5)
    gs = scores_by_url(G, pagerank(G))
    r1_full, r1_top, fin_full, fin_top = [], [], [], []
    for name, g in graphs:
        sf = run_rings(G, g, "full", global_scores=gs)
        st = run_rings(G, g, "top:5", global_scores=gs)
        if len(sf.taus) > 1:
            r1_full.append(sf.taus[1])
        if len(st.taus) > 1:
            r1_top.append(st.taus[1])
        fin_full.append(sf.taus[-1])
        fin_top.append(st.taus[-1])
    m_r1_full, m_r1_top = np.mean(r1_full), np.mean(r1_top)
    m_fin_full, m_fin_top = np.mean(fin_full), np.mean(fin_top)
    wins_r1 += m_r1_top > m_r1_full
    wins_final += m_fin_full > m_fin_top
    print(f"seed {seed:2d}: ring1 top5={m_r1_top:.3f} full={m_r1_full:.3f} | "
          f"final full={m_fin_full:.3f} top5={m_fin_top:.3f}")
print(f"\nwins: top5@ring1 {wins_r1}/{n_seeds}, full@final {wins_final}/{n_seeds}")
print(f"time: {time.time()-t0:.1f}s")
