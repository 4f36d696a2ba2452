"""Plackett-Luce rankings with unobserved consideration sets.

Ranking probabilities and utility fits under this model, plus bounds on how
often each item is considered.
"""

from .bounds import (
    AlphaAssumption,
    BoundState,
    FlipDag,
    build_flip_dag,
    chernoff_discard_bound,
    compute_bounds,
    exactly_k_mass_bound,
    initial_lower_bounds,
    initial_upper_bounds,
    lb_transfer,
    relative_gap_c,
    tighten_lower_bounds,
    tighten_upper_bounds,
    transitive_reduction,
    ub_transfer,
)
from .consideration import (
    consideration_set_prob,
    normalizer_z,
    poisson_binomial_pmf,
    sample_consideration_set,
)
from .core import RankingDataset, TopLStats, Universe, normalize_utilities, validate_ranking
from .plackett_luce import (
    FitConfig,
    infer_utility_order,
    pl_fit,
    pl_nll_gradient,
    pl_ranking_prob,
    pl_sample_ranking,
)
from .plc import (
    McConfig,
    nonidentifiability_witness,
    plc_prob_binned,
    plc_prob_exact,
    plc_prob_mc,
    plc_top_l_matrix,
    plc_top_l_prob,
    sample_plc_ranking,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaAssumption",
    "BoundState",
    "FitConfig",
    "FlipDag",
    "McConfig",
    "RankingDataset",
    "TopLStats",
    "Universe",
    "build_flip_dag",
    "chernoff_discard_bound",
    "compute_bounds",
    "consideration_set_prob",
    "exactly_k_mass_bound",
    "infer_utility_order",
    "initial_lower_bounds",
    "initial_upper_bounds",
    "lb_transfer",
    "nonidentifiability_witness",
    "normalize_utilities",
    "normalizer_z",
    "pl_fit",
    "pl_nll_gradient",
    "pl_ranking_prob",
    "pl_sample_ranking",
    "plc_prob_binned",
    "plc_prob_exact",
    "plc_prob_mc",
    "plc_top_l_matrix",
    "plc_top_l_prob",
    "poisson_binomial_pmf",
    "relative_gap_c",
    "sample_consideration_set",
    "sample_plc_ranking",
    "tighten_lower_bounds",
    "tighten_upper_bounds",
    "transitive_reduction",
    "ub_transfer",
    "validate_ranking",
]
