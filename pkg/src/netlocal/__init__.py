"""Correlations in linear quantum networks with independent sources.

A chain of n sources links n+1 parties; the end parties choose between two
dichotomic measurements while every intermediate party measures its two
neighboring qubits jointly.  The package evaluates such networks exactly,
computes the correlators I and J together with the nonlinear bound
sqrt|I| + sqrt|J| <= 1 and the linear bound |I| + |J| <= 1, constructs
hidden-variable models that saturate or respect those bounds, and certifies
local-polytope membership and visibility thresholds.
"""

from .behavior import (
    Behavior,
    CorrelatorReport,
    alphabets,
    behavior_from_json,
    behavior_to_json,
    bound_values,
    compute_IJ,
    correlator_report,
    load_behavior_csv,
    load_behavior_json,
    mix_behaviors,
    save_behavior_csv,
    save_behavior_json,
    uniform_behavior,
)
from .errors import (
    DimensionError,
    KindError,
    NetlocalError,
    NoCrossingError,
    RangeError,
    ScenarioError,
    SizeGuardError,
)
from .evaluator import (
    closed_form_p14,
    closed_form_p22,
    closed_form_p22_end_parity,
    evaluate_chain,
    evaluate_naive,
    reduce_p14_to_p22,
    reference_relabeling,
    relabel_outputs,
    to_reference_convention,
)
from .hvmodels import (
    NLocalModel,
    StrategyWeights,
    behavior_of_model,
    check_factorization,
    correlated_sources_example,
    model_IJ,
    model_from_json,
    model_to_json,
    q_weights,
    sample_random_model,
    tightness_model_p14,
    tightness_model_p22,
    trial_rng,
)
from .analysis import (
    LPResult,
    ThresholdResult,
    chain_pr_behavior,
    decomposition_check,
    figure4_report,
    lp_local_membership,
    mc_local_mixture_sweep,
    mc_nlocal_sweep,
    monte_carlo_bound_suite,
    visibility_threshold,
)
from .network import (
    KIND_P14,
    KIND_P22,
    NetworkScenario,
    SourceState,
    scenario_from_json,
    scenario_to_json,
    singlet,
    standard_scenario,
    werner,
)

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "CorrelatorReport",
    "DimensionError",
    "KIND_P14",
    "KIND_P22",
    "KindError",
    "LPResult",
    "NLocalModel",
    "NetlocalError",
    "NetworkScenario",
    "NoCrossingError",
    "RangeError",
    "ScenarioError",
    "SizeGuardError",
    "SourceState",
    "StrategyWeights",
    "ThresholdResult",
    "alphabets",
    "behavior_from_json",
    "behavior_of_model",
    "behavior_to_json",
    "bound_values",
    "chain_pr_behavior",
    "check_factorization",
    "closed_form_p14",
    "closed_form_p22",
    "closed_form_p22_end_parity",
    "compute_IJ",
    "correlated_sources_example",
    "correlator_report",
    "decomposition_check",
    "evaluate_chain",
    "evaluate_naive",
    "figure4_report",
    "load_behavior_csv",
    "load_behavior_json",
    "lp_local_membership",
    "mc_local_mixture_sweep",
    "mc_nlocal_sweep",
    "mix_behaviors",
    "model_IJ",
    "model_from_json",
    "model_to_json",
    "monte_carlo_bound_suite",
    "q_weights",
    "reduce_p14_to_p22",
    "reference_relabeling",
    "relabel_outputs",
    "sample_random_model",
    "save_behavior_csv",
    "save_behavior_json",
    "scenario_from_json",
    "scenario_to_json",
    "singlet",
    "standard_scenario",
    "tightness_model_p14",
    "tightness_model_p22",
    "to_reference_convention",
    "trial_rng",
    "uniform_behavior",
    "visibility_threshold",
    "werner",
]
