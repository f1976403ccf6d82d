"""Per-graph ring-1 tau for top-5% vs full, to find where the effect lives."""
import numpy as np

from localrank.ingest import (build_full_graph, extract_referrer_subgraph,
                              filter_crawlers, parse_log, sessionize)
from localrank.pagerank import pagerank, scores_by_url
from localrank.rings import run_rings
from localrank.synth import INTERNAL_DOMAIN, default_profiles, generate_corpus


def build(seed, scale=1.0, n_topics=10):
    profiles = default_profiles(n_topics=n_topics, volume_scale=scale)
    corpus = generate_corpus(profiles, seed=seed)
    records = filter_crawlers(parse_log(iter(corpus.log_lines)).records)
    sessions = sessionize(records, 25.0, {INTERNAL_DOMAIN})
    G = build_full_graph(sessions)
    graphs = [(p.name, extract_referrer_subgraph(sessions, p.domain))
              for p in profiles]
    return G, graphs


for seed in (0, 1, 2):
    G, graphs = build(seed, scale=0.5)
    gs = scores_by_url(G, pagerank(G))
    print(f"seed {seed}: G has {G.node_count} nodes {G.edge_count} edges")
    for name, g in graphs:
        sf = run_rings(G, g, "full", global_scores=gs)
        st = run_rings(G, g, "top:5", global_scores=gs)
        r1f = sf.taus[1] if len(sf.taus) > 1 else float("nan")
        r1t = st.taus[1] if len(st.taus) > 1 else float("nan")
        n1f = len(sf.rings[1]) if len(sf.rings) > 1 else 0
        n1t = len(st.rings[1]) if len(st.rings) > 1 else 0
        print(f"  {name:10s} h0={g.node_count:4d} "
              f"ring1 full: n={n1f:4d} tau={r1f:.3f} | "
              f"top5: n={n1t:4d} tau={r1t:.3f}  -> {'TOP5' if r1t > r1f else 'full'}")
