"""Score-based causal discovery: BGe scoring, greedy search and graph comparison."""
from .ablation import AblationEntry, TierAblation, ablate_tiers  # noqa: F401
from .bge import BgeHyper, BgeScorer, bge_local_score, bge_score  # noqa: F401
from .compare import (  # noqa: F401
    ConsensusReport, GraphAccuracy, OverlapReport, compare_graphs, consensus_edges, eval_against_truth,
    structural_hamming_distance,
)
from .search import HillClimber, SearchConfig, learn_graph  # noqa: F401
