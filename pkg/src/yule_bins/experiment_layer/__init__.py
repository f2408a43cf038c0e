"""Configured experiments, their catalog and result artifacts."""

from yule_bins.experiment_layer.base_experiment import (
    BaseExperiment,
    CheckResult,
    ExperimentContext,
    ExperimentOutcome,
    ReferenceSource,
)
from yule_bins.experiment_layer.config_handler import ConfigError, ConfigHandler, ExperimentConfig
from yule_bins.experiment_layer.experiment_handler import ExperimentHandler

__all__ = [
    "BaseExperiment",
    "CheckResult",
    "ConfigError",
    "ConfigHandler",
    "ExperimentConfig",
    "ExperimentContext",
    "ExperimentHandler",
    "ExperimentOutcome",
    "ReferenceSource",
]
