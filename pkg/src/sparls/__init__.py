"""Sparse adaptive filtering: SPARLS, an RLS baseline and a Monte Carlo harness."""

from .channel import ChannelSpec, ChannelTrace, generate_support, generate_trace, jakes_tap
from .core_ops import MultCounter, restricted_matvec, soft_threshold, threshold_support
from .estimator import (
    NoStepsError,
    SparlsParams,
    SparlsState,
    lcem,
    rank_one_update,
    regularized_cost,
    sparls_init,
    sparls_step,
    support_stats,
)
from .harness import ExperimentConfig, ExperimentResult, default_params, emit_results, run_experiment, run_trial
from .rls import RlsState, rls_init, rls_update

__version__ = "0.1.0"
