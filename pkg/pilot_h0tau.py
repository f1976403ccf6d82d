"""Does the criterion-7 direction hold when tau is restricted to H0's nodes?"""
import numpy as np

from localrank.graph import induced_subgraph
from localrank.ingest import (build_full_graph, extract_referrer_subgraph,
                              filter_crawlers, parse_log, sessionize)
from localrank.pagerank import pagerank, scores_by_url
from localrank.rankcmp import kendall_tau_b
from localrank.rings import expand_full, expand_top_percent
from localrank.synth import INTERNAL_DOMAIN, default_profiles, generate_corpus, measured_profiles


def build(seed, scale=0.6):
    profiles = default_profiles(volume_scale=scale)
    corpus = generate_corpus(profiles, seed=seed)
    records = filter_crawlers(parse_log(iter(corpus.log_lines)).records)
    sessions = sessionize(records, 25.0, {INTERNAL_DOMAIN})
    G = build_full_graph(sessions)
    graphs = [(p.name, extract_referrer_subgraph(sessions, p.domain))
              for p in measured_profiles(profiles)]
    return G, graphs


def tau_on(urls, local_scores, global_scores):
    common = sorted(set(urls) & local_scores.keys() & global_scores.keys())
    if len(common) < 2:
        return 0.0
    return kendall_tau_b([local_scores[u] for u in common],
                         [global_scores[u] for u in common])


wins_h0, wins_ring = 0, 0
for seed in range(10):
    G, graphs = build(seed)
    gs = scores_by_url(G, pagerank(G))
    h0_f, h0_t, ring_f, ring_t = [], [], [], []
    for name, g in graphs:
        h0_urls = list(g.urls)
        h0_nodes = {G.node_id(u) for u in h0_urls}
        for strategy, h0_acc, ring_acc in (("full", h0_f, ring_f),
                                           ("top", h0_t, ring_t)):
            nodes = expand_full(G, h0_nodes) if strategy == "full" else \
                expand_top_percent(G, h0_nodes, 5.0)
            ring_graph = induced_subgraph(G, sorted(nodes))
            local = scores_by_url(ring_graph, pagerank(ring_graph))
            h0_acc.append(tau_on(h0_urls, local, gs))
            ring_acc.append(tau_on(ring_graph.urls, local, gs))
    wins_h0 += np.mean(h0_t) > np.mean(h0_f)
    wins_ring += np.mean(ring_t) > np.mean(ring_f)
    print(f"seed {seed}: H0-restricted ring1 top5={np.mean(h0_t):.3f} "
          f"full={np.mean(h0_f):.3f} | ring-set top5={np.mean(ring_t):.3f} "
          f"full={np.mean(ring_f):.3f}")
print(f"\nH0-restricted: top5 wins {wins_h0}/10; ring-set: top5 wins {wins_ring}/10")
