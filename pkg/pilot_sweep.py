"""Sweep generator knobs for the criterion-7 direction: top5@ring1 > full@ring1."""
import numpy as np

import localrank.synth as synth
from localrank.ingest import (build_full_graph, extract_referrer_subgraph,
                              filter_crawlers, parse_log, sessionize)
from localrank.pagerank import pagerank, scores_by_url
from localrank.rings import run_rings
from localrank.synth import INTERNAL_DOMAIN, default_profiles, generate_corpus, measured_profiles

BASE_ZIPF = synth._zipf_weights


def build(seed, ppt, scale):
    profiles = default_profiles(volume_scale=scale)
    corpus = generate_corpus(profiles, pages_per_topic=ppt, seed=seed)
    records = filter_crawlers(parse_log(iter(corpus.log_lines)).records)
    sessions = sessionize(records, 25.0, {INTERNAL_DOMAIN})
    G = build_full_graph(sessions)
    graphs = [(p.name, extract_referrer_subgraph(sessions, p.domain))
              for p in measured_profiles(profiles)]
    return G, graphs


def evaluate(tag, ppt=100, scale=0.6, zipf_exp=1.05, seeds=5):
    # default-exponent calls (page popularity) get zipf_exp; explicit
    # exponent calls (the core's 0.9) pass through unchanged
    synth._zipf_weights = lambda n, exponent=zipf_exp: BASE_ZIPF(n, exponent)
    wins = 0
    r0s, r1f, r1t, ratios = [], [], [], []
    for seed in range(seeds):
        G, graphs = build(seed, ppt, scale)
        gs = scores_by_url(G, pagerank(G))
        f1, t1 = [], []
        for name, g in graphs:
            sf = run_rings(G, g, "full", global_scores=gs, max_rings=1)
            st = run_rings(G, g, "top:5", global_scores=gs, max_rings=1)
            if len(sf.taus) > 1 and len(st.taus) > 1:
                f1.append(sf.taus[1])
                t1.append(st.taus[1])
                r0s.append(sf.taus[0])
                ratios.append(len(sf.rings[1]) / len(sf.rings[0]))
        r1f.append(np.mean(f1))
        r1t.append(np.mean(t1))
        wins += np.mean(t1) > np.mean(f1)
    print(f"{tag:28s} ring0={np.mean(r0s):.3f} ring1 full={np.mean(r1f):.3f} "
          f"top5={np.mean(r1t):.3f} growth×={np.mean(ratios):.1f} "
          f"top5_wins={wins}/{seeds}")
    synth._zipf_weights = BASE_ZIPF


evaluate("baseline ppt=100 z=1.05")
evaluate("weak hubs z=0.8", zipf_exp=0.8)
evaluate("strong hubs z=1.4", zipf_exp=1.4)
evaluate("big sparse ppt=200", ppt=200)
evaluate("huge sparse ppt=300", ppt=300)
