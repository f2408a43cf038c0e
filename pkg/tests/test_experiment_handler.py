import json
import math
import os

import numpy as np
import pandas as pd
import pytest

from yule_bins.experiment_layer.base_experiment import (
    BLOCKS_PER_EXPERIMENT,
    BaseExperiment,
    CheckResult,
    ExperimentContext,
    ExperimentOutcome,
    ReferenceSource,
    compare,
)
from yule_bins.experiment_layer.config_handler import ConfigError, ExperimentConfig
from yule_bins.experiment_layer.experiment_handler import (
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_SUSPECT,
    ExperimentHandler,
    _json_ready,
    stderr_halving_check,
)
from yule_bins.model_layer.occupancy import ThrowMode, TruncationError, throw_balls
from yule_bins.model_layer.probabilities import bin_probabilities
from yule_bins.model_layer.rng import RngStream
from yule_bins.model_layer.serialization import read_occupancy_csv, read_splits_csv
from yule_bins.model_layer.splits import sample_splits


class _ScriptedExperiment(BaseExperiment):
    """Returns one check whose verdict is a parameter; records the context it saw."""

    anchor = "scripted"
    defaults = {"estimate": 1.0, "truncate": False}

    def __init__(self, experiment_id: str):
        self.experiment_id = experiment_id
        self.seen: list = []

    def execute(self, context: ExperimentContext) -> ExperimentOutcome:
        self.seen.append(context)
        if context.parameters["truncate"]:
            raise TruncationError(17)
        outcome = ExperimentOutcome(self.experiment_id)
        outcome.checks.append(
            compare(
                "close-to-one",
                context.parameters["estimate"],
                1.0,
                ReferenceSource.CLOSED_FORM,
                abs_tolerance=0.1,
                rho=2.0,
            )
        )
        outcome.plots["series"] = pd.DataFrame({"x": [0.0, 1.0], "y": [1.0, math.inf]})
        outcome.notes["resolution"] = {"value": np.float64(0.5), "limit": math.inf}
        return outcome


@pytest.fixture
def handler() -> ExperimentHandler:
    return ExperimentHandler([_ScriptedExperiment("first"), _ScriptedExperiment("second")])


def _config(handler: ExperimentHandler, tmp_path, *overrides: str) -> ExperimentConfig:
    items = [f"output_dir={tmp_path}", *overrides]
    return handler.load_config(None, items)


def test_default_catalog_has_ten_experiments() -> None:
    # Act
    handler = ExperimentHandler()

    # Assert
    assert len(handler.catalog()) == 10
    assert handler.catalog()[0] == "model-checks"
    assert "rho1-critical" in handler.catalog()
    assert all(":" in line for line in handler.list_experiments())


def test_model_checks_accepts_condition_c_from_two() -> None:
    handler = ExperimentHandler()

    config = handler.load_config(
        None, ["experiment_id=model-checks", "condition_c_indices=[2,10000]", "coupled_balls=[0,5]"]
    )

    assert config.parameters["condition_c_indices"] == [2, 10000]
    assert config.parameters["coupled_balls"] == [0, 5]


@pytest.mark.parametrize(
    "override, message",
    [
        ("condition_c_indices=[1,10]", "condition_c_indices must be >= 2"),
        ("coupled_balls=[10,10]", "coupled_balls"),
        ("coupled_balls=[1,2,3]", "coupled_balls"),
    ],
)
def test_model_checks_rejections(override: str, message: str) -> None:
    with pytest.raises(ConfigError, match=message):
        ExperimentHandler().load_config(None, ["experiment_id=model-checks", override])


def test_duplicate_ids_rejected() -> None:
    with pytest.raises(ValueError, match="unique"):
        ExperimentHandler([_ScriptedExperiment("a"), _ScriptedExperiment("a")])


def test_run_writes_artifacts(handler: ExperimentHandler, tmp_path) -> None:
    # Arrange
    config = _config(handler, tmp_path, "experiment_id=first", "master_seed=11")

    # Act
    status = handler.run(config)

    # Assert
    assert status == EXIT_PASS
    results = pd.read_csv(tmp_path / "results.csv")
    assert results["check_id"].tolist() == ["close-to-one"]
    assert results["reference_source"].tolist() == ["closed-form"]
    assert bool(results["passed"].iloc[0])
    with open(tmp_path / "summary.json", encoding="utf-8") as handle:
        summary = json.load(handle)
    assert summary["status"] == EXIT_PASS
    assert summary["criteria"][0]["id"] == "close-to-one"
    assert summary["notes"]["resolution"] == {"value": 0.5, "limit": "inf"}
    assert summary["config"]["master_seed"] == 11
    assert os.path.exists(tmp_path / "plotdata" / "series.csv")


def test_run_hands_out_disjoint_seed_blocks(handler: ExperimentHandler, tmp_path) -> None:
    handler.run(_config(handler, tmp_path, "experiment_id=second"))

    context = handler._experiments["second"].seen[0]
    assert context.block_offset == BLOCKS_PER_EXPERIMENT


def test_run_reports_failure(handler: ExperimentHandler, tmp_path) -> None:
    status = handler.run(_config(handler, tmp_path, "experiment_id=first", "estimate=2.0"))

    assert status == EXIT_FAIL
    with open(tmp_path / "summary.json", encoding="utf-8") as handle:
        assert json.load(handle)["passed"] is False


def test_run_reports_truncation_as_suspect(handler: ExperimentHandler, tmp_path) -> None:
    status = handler.run(_config(handler, tmp_path, "experiment_id=first", "truncate=true"))

    assert status == EXIT_SUSPECT
    with open(tmp_path / "summary.json", encoding="utf-8") as handle:
        assert "17" in json.load(handle)["notes"]["truncation"]

def test_write_artifacts_dumps_snapshots(handler: ExperimentHandler, tmp_path) -> None:
    # Arrange
    splits = sample_splits(30, RngStream(3))
    occ = throw_balls(bin_probabilities(splits, 1.0), 200, ThrowMode.EXACT, RngStream(4))
    outcome = ExperimentOutcome("first", snapshots={"splits": splits, "occupancy": occ})
    config = _config(handler, tmp_path, "experiment_id=first")

    # Act
    handler.write_artifacts(outcome, config, EXIT_PASS)

    # Assert
    restored = read_splits_csv(str(tmp_path / "snapshots" / "splits.csv"))
    np.testing.assert_array_equal(restored.increments, splits.increments)
    back = read_occupancy_csv(str(tmp_path / "snapshots" / "occupancy.csv"), ThrowMode.EXACT, 200)
    np.testing.assert_array_equal(back.counts, occ.counts)
    assert back.tail_count == occ.tail_count


def test_first_empty_snapshot_of_replication_zero(tmp_path) -> None:
    # Arrange
    handler = ExperimentHandler()
    config = handler.load_config(
        None,
        [
            "experiment_id=first-empty",
            f"output_dir={tmp_path}",
            "n=10000",
            "replications=100",
            "surrogate_bins=200",
            "deciles=2",
            "snapshot=true",
        ],
    )

    # Act
    handler.run(config)

    # Assert
    splits = read_splits_csv(str(tmp_path / "snapshots" / "splits_rep0.csv"))
    occ = read_occupancy_csv(
        str(tmp_path / "snapshots" / "occupancy_rep0.csv"), ThrowMode.POISSONIZED, 10000
    )
    assert splits.n_bins >= 200
    assert occ.n_bins == splits.n_bins


def test_status_prefers_suspect() -> None:
    suspect = CheckResult("a", 1.0, 1.0, ReferenceSource.MC_ORACLE, 0.0, False, suspect=True)

    assert ExperimentHandler.status(ExperimentOutcome("x", [suspect])) == EXIT_SUSPECT


def test_stderr_halving_check() -> None:
    """Doubling the replications shrinks the standard error by sqrt(2)."""
    check = stderr_halving_check(20090117)

    assert check.passed
    assert check.reference_value == pytest.approx(math.sqrt(2.0))


def test_json_ready() -> None:
    value = {"a": [np.int64(3), math.nan], 1: pd.DataFrame({"x": [1.0]}), "b": (-math.inf,)}

    assert _json_ready(value) == {"a": [3, "nan"], "1": {"x": [1.0]}, "b": ["-inf"]}


@pytest.mark.slow
def test_self_test_passes(tmp_path) -> None:
    status = ExperimentHandler().self_test(str(tmp_path))

    assert status == EXIT_PASS
    with open(tmp_path / "summary.json", encoding="utf-8") as handle:
        summary = json.load(handle)
    assert summary["experiment_id"] == "self-test"
    assert any(c["id"] == "stderr-halving" for c in summary["criteria"])
