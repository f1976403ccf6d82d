"""localrank: local ranking experiments on browse graphs.

Builds referrer-conditioned browsing subgraphs from pageview logs, measures
how local PageRank diverges from the global one under controlled expansion,
identifies a surfer's referrer domain from walk likelihoods, and predicts
the rank divergence from purely local structural features.
"""

from .graph import (BrowseGraph, GraphStats, build_graph, density,
                    induced_subgraph, load_graph_tsv, out_frontier,
                    save_graph_tsv, stats)
from .ingest import (PageviewRecord, Session, extract_referrer_subgraph,
                     filter_crawlers, normalize_domain, parse_log, sessionize)
from .pagerank import RankVector, pagerank, transition_prob
from .rankcmp import RankAgreement, kendall_tau_b, rank_agreement, spearman_rho
from .surfer import identify_referrer, step_likelihood, surfer_curves, walk_step
from .rings import expand_full, expand_top_percent, make_initial_sets, run_rings
from .features import FEATURE_NAMES, FeatureVector, assortativity, extract_features
from .forest import ForestModel, fit_forest, load_model, save_model
from .predictor import (JackknifeSample, build_jackknife, cross_validate,
                        permutation_importance, rank_subgraphs, train_forest)
from .synth import ReferrerProfile, default_profiles, generate_corpus

__version__ = "0.1.0"
