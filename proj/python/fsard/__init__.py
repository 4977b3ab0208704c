"""Age of information for framed reservation ALOHA (FSA-RD, FSA-RD-One) and slotted ALOHA."""

from ._core import (
    ProtocolConfig,
    __version__,
    analyze,
    capped_success_pmf,
    collision_free_prob,
    near_optimal_gamma,
    optimize_fsa_rd,
    optimize_fsa_rd_one,
    reservation_count_pmf,
    simulate,
    singleton_count_pmf,
    steady_state,
    successful_update_pmf,
    transition_matrix,
)

__all__ = [
    "ProtocolConfig",
    "__version__",
    "analyze",
    "capped_success_pmf",
    "collision_free_prob",
    "near_optimal_gamma",
    "optimize_fsa_rd",
    "optimize_fsa_rd_one",
    "reservation_count_pmf",
    "simulate",
    "singleton_count_pmf",
    "steady_state",
    "successful_update_pmf",
    "transition_matrix",
]
