"""Experiment handler: catalog of experiments, runs and result artifacts.

The handler owns the ten experiments, hands each one its own range of seed blocks and writes
results.csv, summary.json and plotdata/*.csv to the configured output directory.
"""

from __future__ import annotations

import json
import logging
import math
import os
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd

from yule_bins.experiment_layer.base_experiment import (
    BLOCKS_PER_EXPERIMENT,
    BaseExperiment,
    CheckResult,
    ExperimentContext,
    ExperimentOutcome,
    ReferenceSource,
    compare,
)
from yule_bins.experiment_layer.config_handler import (
    DEFAULT_MASTER_SEED,
    ConfigHandler,
    ExperimentConfig,
)
from yule_bins.experiment_layer.model_experiments import (
    DeterministicCompareExperiment,
    FirstEmptyExperiment,
    LimitLawExperiment,
    LlnExperiment,
    MixedPoissonExperiment,
    ModelChecksExperiment,
    TwoDimExperiment,
)
from yule_bins.experiment_layer.rare_experiments import (
    DoubleThresholdExperiment,
    RareRegimesExperiment,
    Rho1CriticalExperiment,
)
from yule_bins.model_layer.occupancy import TruncationError
from yule_bins.model_layer.rng import RngStream, run_replications
from yule_bins.model_layer.serialization import write_occupancy_csv, write_splits_csv
from yule_bins.model_layer.splits import SplitSequence, sample_splits
from yule_bins.stats_layer.samples import mean_estimate

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_SUSPECT = 3

SELF_TEST_ID = "self-test"
SELF_TEST_OVERRIDES = {
    "n_bins": 1000,
    "vectors": 10,
    "z_replications": 500,
    "ineq_draws": 10000,
    "d_oracle_terms": 10000,
    "d_samples": 500,
    "d_mean_draws": 100000,
}
STDERR_REPLICATIONS = 1000
STDERR_BINS = 10

CATALOG_ORDER = (
    ModelChecksExperiment,
    LimitLawExperiment,
    TwoDimExperiment,
    FirstEmptyExperiment,
    MixedPoissonExperiment,
    LlnExperiment,
    DeterministicCompareExperiment,
    RareRegimesExperiment,
    DoubleThresholdExperiment,
    Rho1CriticalExperiment,
)


class ExperimentHandler:
    """Runs catalog experiments from validated configurations and writes their artifacts."""

    def __init__(self, experiments: Optional[Iterable[BaseExperiment]] = None):
        items = list(experiments) if experiments is not None else [cls() for cls in CATALOG_ORDER]
        self._experiments: Dict[str, BaseExperiment] = {e.experiment_id: e for e in items}
        if len(self._experiments) != len(items):
            raise ValueError("experiment ids must be unique")
        self._config_handler = ConfigHandler(self._experiments)

    def catalog(self) -> List[str]:
        """Experiment ids in catalog order."""
        return list(self._experiments)

    def list_experiments(self) -> List[str]:
        return [experiment.describe() for experiment in self._experiments.values()]

    def load_config(self, filepath: Optional[str] = None, overrides: Iterable[str] = ()) -> ExperimentConfig:
        return self._config_handler.load_config(filepath, overrides)

    def _context(self, config: ExperimentConfig) -> ExperimentContext:
        position = self.catalog().index(config.experiment_id)
        return ExperimentContext(
            dict(config.parameters),
            config.master_seed,
            config.threads,
            block_offset=position * BLOCKS_PER_EXPERIMENT,
        )

    def run(self, config: ExperimentConfig) -> int:
        """Run one configured experiment and write its artifacts.

        Returns:
            int: 0 when every check passes, 1 on a failed check, 3 when a result is suspect
            (truncation reached).
        """
        experiment = self._experiments[config.experiment_id]
        logger.info("running %s (seed %d, %d thread(s))", config.experiment_id, config.master_seed, config.threads)
        try:
            outcome = experiment.execute(self._context(config))
        except TruncationError as exc:
            logger.warning("%s stopped: %s", config.experiment_id, exc)
            outcome = ExperimentOutcome(config.experiment_id, notes={"truncation": str(exc)})
            self.write_artifacts(outcome, config, EXIT_SUSPECT)
            return EXIT_SUSPECT

        status = self.status(outcome)
        self.write_artifacts(outcome, config, status)
        for check in outcome.checks:
            logger.info(
                "%s %-28s %s estimate=%.6g reference=%.6g",
                config.experiment_id,
                check.check_id,
                "PASS" if check.passed else "FAIL",
                check.estimate,
                check.reference_value,
            )
        logger.info("%s finished with status %d", config.experiment_id, status)
        return status

    @staticmethod
    def status(outcome: ExperimentOutcome) -> int:
        if outcome.suspect:
            return EXIT_SUSPECT
        return EXIT_PASS if outcome.passed else EXIT_FAIL

    def write_artifacts(self, outcome: ExperimentOutcome, config: ExperimentConfig, status: int) -> None:
        """results.csv, summary.json, plotdata/ and snapshots/ under config.output_dir."""
        os.makedirs(config.output_dir, exist_ok=True)
        results_path = os.path.join(config.output_dir, "results.csv")
        outcome.results_frame().to_csv(
            results_path, index=False, float_format="%.12g", encoding="utf-8", lineterminator="\n"
        )
        summary = {
            "experiment_id": outcome.experiment_id,
            "status": status,
            "passed": outcome.passed,
            "suspect": outcome.suspect,
            "criteria": [check.criterion() for check in outcome.checks],
            "notes": _json_ready(outcome.notes),
            "config": _json_ready(config.to_dict()),
        }
        with open(os.path.join(config.output_dir, "summary.json"), "w", encoding="utf-8") as handle:
            json.dump(summary, handle, indent=2)
            handle.write("\n")
        if outcome.plots:
            plot_dir = os.path.join(config.output_dir, "plotdata")
            os.makedirs(plot_dir, exist_ok=True)
            for stem, frame in outcome.plots.items():
                frame.to_csv(
                    os.path.join(plot_dir, f"{stem}.csv"),
                    index=False,
                    float_format="%.12g",
                    lineterminator="\n",
                )
        if outcome.snapshots:
            snapshot_dir = os.path.join(config.output_dir, "snapshots")
            os.makedirs(snapshot_dir, exist_ok=True)
            for stem, item in outcome.snapshots.items():
                path = os.path.join(snapshot_dir, f"{stem}.csv")
                if isinstance(item, SplitSequence):
                    write_splits_csv(item, path)
                else:
                    write_occupancy_csv(item, path)
        logger.info("wrote %s", results_path)

    def self_test(self, output_dir: str, threads: int = 1) -> int:
        """Reduced model-checks plus the 1/sqrt(R) scaling of the standard error."""
        experiment = self._experiments[ModelChecksExperiment.experiment_id]
        parameters = {**experiment.defaults, **SELF_TEST_OVERRIDES}
        experiment.check_parameters(parameters)
        context = ExperimentContext(parameters, DEFAULT_MASTER_SEED, threads)
        outcome = experiment.execute(context)
        outcome.experiment_id = SELF_TEST_ID
        outcome.checks.append(stderr_halving_check(DEFAULT_MASTER_SEED, threads))

        config = ExperimentConfig(SELF_TEST_ID, parameters, DEFAULT_MASTER_SEED, output_dir, threads)
        status = self.status(outcome)
        self.write_artifacts(outcome, config, status)
        logger.info("self-test finished with status %d", status)
        return status


def stderr_halving_check(master_seed: int, threads: int = 1) -> CheckResult:
    """Standard error of the mean of M_10 at R and 2R replications; the ratio should be sqrt(2)."""

    def martingale(stream: RngStream) -> float:
        return float(sample_splits(STDERR_BINS, stream).martingale[-1])

    # first block past the seed space of the catalog
    base = RngStream.block(master_seed, len(CATALOG_ORDER) * BLOCKS_PER_EXPERIMENT)
    small = mean_estimate(run_replications(martingale, STDERR_REPLICATIONS, base, threads), master_seed)
    large = mean_estimate(
        run_replications(martingale, 2 * STDERR_REPLICATIONS, base.child(STDERR_REPLICATIONS), threads),
        master_seed,
    )
    return compare(
        "stderr-halving",
        small.stderr / large.stderr,
        math.sqrt(2.0),
        ReferenceSource.CLOSED_FORM,
        rel_tolerance=0.25,
        n=STDERR_BINS,
        parameter=f"R={STDERR_REPLICATIONS}",
    )


def _json_ready(value: Any) -> Any:
    """Replace non-finite floats and numpy scalars so json.dump writes valid JSON."""
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, pd.DataFrame):
        return _json_ready(value.to_dict(orient="list"))
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value
