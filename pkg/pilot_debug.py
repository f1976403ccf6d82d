"""Diagnose intersection sizes and unreachable nodes under the default config."""
import numpy as np

from localrank.ingest import (build_full_graph, extract_referrer_subgraph,
                              filter_crawlers, parse_log, sessionize)
from localrank.pagerank import pagerank, scores_by_url
from localrank.rankcmp import rank_agreement
from localrank.synth import (INTERNAL_DOMAIN, default_profiles,
                             generate_corpus, measured_profiles)

profiles = default_profiles()
corpus = generate_corpus(profiles, seed=7)
records = filter_crawlers(parse_log(iter(corpus.log_lines)).records)
sessions = sessionize(records, 25.0, {INTERNAL_DOMAIN})
G = build_full_graph(sessions)
graphs = [(p.name, extract_referrer_subgraph(sessions, p.domain))
          for p in measured_profiles(profiles)]

print("-- pairwise common nodes / tau --")
scored = {n: scores_by_url(g, pagerank(g)) for n, g in graphs}
names = list(scored)
for i in range(len(names)):
    row = []
    for j in range(len(names)):
        if i == j:
            row.append("   .      ")
            continue
        common = len(scored[names[i]].keys() & scored[names[j]].keys())
        if common >= 2:
            tau = rank_agreement(scored[names[i]], scored[names[j]]).kendall_tau
            row.append(f"{common:4d}/{tau:+.2f}")
        else:
            row.append(f"{common:4d}/ ----")
    print(f"{names[i]:9s}", " ".join(row))

print("\n-- reachability from google's subgraph --")
from localrank.rings import expand_full
nodes = {G.node_id(u) for u in dict(graphs)["google"].urls}
while True:
    grown = expand_full(G, nodes)
    if grown == nodes:
        break
    nodes = grown
unreachable = set(range(G.node_count)) - nodes
print(f"G={G.node_count}, reachable={len(nodes)}, unreachable={len(unreachable)}")
in_deg = np.bincount(G.dst, minlength=G.node_count)
out_deg = np.bincount(G.src, minlength=G.node_count)
for v in sorted(unreachable)[:15]:
    print(f"  {G.url(v)} in={in_deg[v]} out={out_deg[v]}")
if unreachable:
    srcs = {int(s) for s, d, w in G.edges() if d in unreachable}
    print("  sources into unreachable set sit in:",
          sorted({G.url(s) for s in srcs if s in unreachable})[:5], "(internal)" )
