"""Base class for all experiments of the catalog.

An experiment turns a validated parameter record into a list of checks: each check compares
one estimate (simulated or computed) with one reference value and records whether the two
agree within a stated tolerance. Experiments may also return plot series as DataFrames; the
handler writes them under plotdata/, and raw split or occupancy realizations under snapshots/.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from yule_bins.model_layer.occupancy import OccupancyCounts
from yule_bins.model_layer.rng import RngStream
from yule_bins.model_layer.splits import SplitSequence
from yule_bins.stats_layer.samples import EstimateWithCI

RESULT_COLUMNS = [
    "experiment_id",
    "check_id",
    "rho",
    "n",
    "x",
    "alpha",
    "delta",
    "parameter",
    "estimate",
    "stderr",
    "reference_value",
    "reference_source",
    "tolerance",
    "passed",
    "suspect",
]

# sub-blocks of seed streams available to one experiment
BLOCKS_PER_EXPERIMENT = 256


class ReferenceSource(str, Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed-form"
    MC_ORACLE = "mc-oracle"
    PRINTED_FORMULA = "paper-formula"


@dataclass
class CheckResult:
    """One comparison of an estimate with a reference; one row of results.csv."""

    check_id: str
    estimate: float
    reference_value: float
    reference_source: ReferenceSource
    tolerance: float
    passed: bool
    stderr: float = 0.0
    suspect: bool = False
    rho: float = math.nan
    n: float = math.nan
    x: float = math.nan
    alpha: float = math.nan
    delta: float = math.nan
    parameter: str = ""

    def to_row(self, experiment_id: str) -> Dict[str, Any]:
        return {
            "experiment_id": experiment_id,
            "check_id": self.check_id,
            "rho": self.rho,
            "n": self.n,
            "x": self.x,
            "alpha": self.alpha,
            "delta": self.delta,
            "parameter": self.parameter,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "reference_value": self.reference_value,
            "reference_source": ReferenceSource(self.reference_source).value,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "suspect": bool(self.suspect),
        }

    def criterion(self) -> Dict[str, Any]:
        return {
            "id": self.check_id,
            "pass": bool(self.passed),
            "measured": _json_float(self.estimate),
            "reference": _json_float(self.reference_value),
            "tolerance": _json_float(self.tolerance),
        }


def _json_float(value: float) -> float | str | None:
    """JSON has no inf or nan; they are written as strings."""
    if value is None:
        return None
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def compare(
    check_id: str,
    estimate: EstimateWithCI | float,
    reference: float,
    source: ReferenceSource,
    *,
    n_sigma: float = 0.0,
    rel_tolerance: float = 0.0,
    abs_tolerance: float = 0.0,
    suspect: bool = False,
    **labels: Any,
) -> CheckResult:
    """Pass when |estimate - reference| <= abs + rel |reference| + n_sigma stderr."""
    if isinstance(estimate, EstimateWithCI):
        value, stderr = estimate.value, estimate.stderr
    else:
        value, stderr = float(estimate), 0.0
    tolerance = abs_tolerance + rel_tolerance * abs(reference) + n_sigma * stderr
    passed = bool(abs(value - reference) <= tolerance)
    return CheckResult(
        check_id, value, reference, source, tolerance, passed, stderr, suspect, **labels
    )


def bound_check(
    check_id: str,
    value: float,
    bound: float,
    source: ReferenceSource,
    *,
    below: bool = True,
    stderr: float = 0.0,
    **labels: Any,
) -> CheckResult:
    """Pass when value < bound (below=True) or value > bound."""
    passed = value < bound if below else value > bound
    return CheckResult(check_id, value, bound, source, 0.0, bool(passed), stderr, **labels)


@dataclass
class ExperimentOutcome:
    experiment_id: str
    checks: List[CheckResult] = field(default_factory=list)
    plots: Dict[str, pd.DataFrame] = field(default_factory=dict)
    """Plot series by file stem; written to plotdata/<stem>.csv."""
    notes: Dict[str, Any] = field(default_factory=dict)
    """Extra JSON-ready entries for summary.json."""
    snapshots: Dict[str, Union[SplitSequence, OccupancyCounts]] = field(default_factory=dict)
    """Raw realizations by file stem; written to snapshots/<stem>.csv."""

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def suspect(self) -> bool:
        return any(check.suspect for check in self.checks)

    def results_frame(self) -> pd.DataFrame:
        rows = [check.to_row(self.experiment_id) for check in self.checks]
        return pd.DataFrame(rows, columns=RESULT_COLUMNS)


@dataclass(frozen=True)
class ExperimentContext:
    """What an experiment sees at run time."""

    parameters: Dict[str, Any]
    master_seed: int
    threads: int = 1
    block_offset: int = 0
    """First seed block owned by the experiment; blocks of two experiments never overlap."""

    def stream(self, sub_block: int) -> RngStream:
        """First stream of the experiment's sub-block `sub_block`."""
        if not 0 <= sub_block < BLOCKS_PER_EXPERIMENT:
            raise ValueError(f"sub_block must lie in [0, {BLOCKS_PER_EXPERIMENT}), got {sub_block}")
        return RngStream.block(self.master_seed, self.block_offset + sub_block)


class BaseExperiment(ABC):
    """Base class for all experiments."""

    experiment_id: str = ""
    anchor: str = ""
    """Name of the limit theorem the experiment exercises."""
    defaults: Dict[str, Any] = {}

    def check_parameters(self, parameters: Dict[str, Any]) -> None:
        """Range checks on a complete parameter record; raise ValueError on violations."""

    def describe(self) -> str:
        defaults = ", ".join(f"{k}={v}" for k, v in self.defaults.items())
        return f"{self.experiment_id}: {self.anchor} [{defaults}]"

    @abstractmethod
    def execute(self, context: ExperimentContext) -> ExperimentOutcome:
        """Runs the experiment and returns its checks."""
        raise NotImplementedError("Subclasses must implement this method")


def require(condition: bool, message: str) -> None:
    """Raise ValueError(message) unless `condition` holds."""
    if not condition:
        raise ValueError(message)


def cdf_series(values: Sequence[float], cdf: Callable, points: int = 101) -> pd.DataFrame:
    """Empirical and analytic CDF on the sample quantiles, for plotdata/."""
    ordered = np.sort(np.asarray(values, dtype=float))
    grid = np.quantile(ordered, np.linspace(0.0, 1.0, points))
    empirical = np.searchsorted(ordered, grid, side="right") / ordered.size
    analytic = np.asarray(cdf(grid), dtype=float)
    return pd.DataFrame({"x": grid, "empirical": empirical, "analytic": analytic})
