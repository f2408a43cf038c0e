"""Statistics comparing simulated processes with their limits."""

from yule_bins.stats_layer.functionals import (
    batched_dispersion,
    dispersion_index,
    empirical_laplace_functional,
    lln_functional,
    lln_limit,
)
from yule_bins.stats_layer.gof import GofReport, count_pmf_test, ks_test, merge_cells
from yule_bins.stats_layer.samples import (
    EstimateWithCI,
    ReplicatedSamples,
    binomial_estimate,
    mean_estimate,
    ratio_estimate,
)

__all__ = [
    "EstimateWithCI",
    "GofReport",
    "ReplicatedSamples",
    "batched_dispersion",
    "binomial_estimate",
    "count_pmf_test",
    "dispersion_index",
    "empirical_laplace_functional",
    "ks_test",
    "lln_functional",
    "lln_limit",
    "mean_estimate",
    "merge_cells",
    "ratio_estimate",
]
