"""Community-based evolutionary search for fair influence maximisation."""

from .community import Partition, louvain, modularity
from .diffusion import (InfluenceEstimate, LiveEdgeEnsemble, direct_ic_simulate, estimate_influence,
                        greedy_celf, group_baselines, sample_ensemble)
from .evolution import EvolutionConfig, evolve, rea_fim_variant
from .fairness import (FairnessReport, diversity_constraint_violation, evaluate_fitness,
                       maximin_fairness, price_of_fairness)
from .graph import (AttributedGraph, SbmSpec, generate_sbm, induced_subgraph, karate_club,
                    load_edge_list, load_groups)
from .selection import NodeScores, pagerank

__all__ = [
    "Partition",
    "louvain",
    "modularity",
    "InfluenceEstimate",
    "LiveEdgeEnsemble",
    "direct_ic_simulate",
    "estimate_influence",
    "greedy_celf",
    "group_baselines",
    "sample_ensemble",
    "EvolutionConfig",
    "evolve",
    "rea_fim_variant",
    "FairnessReport",
    "diversity_constraint_violation",
    "evaluate_fitness",
    "maximin_fairness",
    "price_of_fairness",
    "AttributedGraph",
    "SbmSpec",
    "generate_sbm",
    "induced_subgraph",
    "karate_club",
    "load_edge_list",
    "load_groups",
    "NodeScores",
    "pagerank",
]

__version__ = "0.1.0"
