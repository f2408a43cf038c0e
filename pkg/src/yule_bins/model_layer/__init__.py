"""Exact sampling of the Yule-bin occupancy model."""

from yule_bins.model_layer.occupancy import (
    OccupancyCounts,
    ThrowMode,
    TruncationError,
    coupled_throws,
    first_empty_index,
    throw_balls,
)
from yule_bins.model_layer.point_process import (
    Rectangle,
    ScaledPointProcess,
    ScaleDescriptor,
    empty_bin_process,
    two_dim_process,
)
from yule_bins.model_layer.probabilities import (
    BinProbabilityVector,
    SourceTag,
    bin_probabilities,
    deterministic_power_law,
)
from yule_bins.model_layer.rng import RngStream, run_replications
from yule_bins.model_layer.splits import (
    SplitSequence,
    sample_d_rho,
    sample_splits,
    sample_t_k_conditional,
)

__all__ = [
    "BinProbabilityVector",
    "OccupancyCounts",
    "Rectangle",
    "RngStream",
    "ScaleDescriptor",
    "ScaledPointProcess",
    "SourceTag",
    "SplitSequence",
    "ThrowMode",
    "TruncationError",
    "bin_probabilities",
    "coupled_throws",
    "deterministic_power_law",
    "empty_bin_process",
    "first_empty_index",
    "run_replications",
    "sample_d_rho",
    "sample_splits",
    "sample_t_k_conditional",
    "throw_balls",
    "two_dim_process",
]
