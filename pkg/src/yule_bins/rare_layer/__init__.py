"""Rare-event asymptotics of the empty-bin counts for rho >= 1."""

from yule_bins.rare_layer.conditional import conditional_occupancy_experiment
from yule_bins.rare_layer.expected_counts import (
    ExpectedCountResult,
    Method,
    MethodDisagreementError,
    conditioned_exp_sum,
    cross_validate_exp_sum,
    exact_exp_sum,
    exact_term_expectation,
    expected_exp_sum,
    poissonization_gap_bound,
)
from yule_bins.rare_layer.regimes import (
    RegimePrediction,
    RegimeSpec,
    case3_integral,
    psi_ratio,
    regime_exponents_symbolic,
    regime_prediction,
    rho1_conditioned_limit,
    rho1_scaling,
)

__all__ = [
    "ExpectedCountResult",
    "Method",
    "MethodDisagreementError",
    "RegimePrediction",
    "RegimeSpec",
    "case3_integral",
    "conditional_occupancy_experiment",
    "conditioned_exp_sum",
    "cross_validate_exp_sum",
    "exact_exp_sum",
    "exact_term_expectation",
    "expected_exp_sum",
    "poissonization_gap_bound",
    "psi_ratio",
    "regime_exponents_symbolic",
    "regime_prediction",
    "rho1_conditioned_limit",
    "rho1_scaling",
]
