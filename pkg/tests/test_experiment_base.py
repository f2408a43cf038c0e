import math

import numpy as np
import pandas as pd
import pytest

from yule_bins.experiment_layer.base_experiment import (
    BLOCKS_PER_EXPERIMENT,
    RESULT_COLUMNS,
    BaseExperiment,
    CheckResult,
    ExperimentContext,
    ExperimentOutcome,
    ReferenceSource,
    bound_check,
    cdf_series,
    compare,
    require,
)
from yule_bins.model_layer.rng import RngStream
from yule_bins.stats_layer.samples import EstimateWithCI


def test_compare_combines_tolerances() -> None:
    # Arrange
    estimate = EstimateWithCI(1.1, 0.02, 100)

    # Act
    inside = compare("a", estimate, 1.0, ReferenceSource.QUADRATURE, n_sigma=3, rel_tolerance=0.05)
    outside = compare("b", estimate, 1.0, ReferenceSource.QUADRATURE, n_sigma=2, rel_tolerance=0.05)

    # Assert
    assert inside.passed
    assert inside.tolerance == pytest.approx(0.11)
    assert inside.stderr == 0.02
    assert not outside.passed


def test_compare_plain_float_with_labels() -> None:
    check = compare("c", 2.0, 2.05, ReferenceSource.CLOSED_FORM, abs_tolerance=0.1, rho=2.0, n=1e6)

    assert check.passed
    assert check.stderr == 0.0
    assert check.rho == 2.0
    assert check.n == 1e6
    assert math.isnan(check.alpha)


def test_bound_check_directions() -> None:
    assert bound_check("lt", 0.1, 0.2, ReferenceSource.CLOSED_FORM).passed
    assert not bound_check("lt", 0.3, 0.2, ReferenceSource.CLOSED_FORM).passed
    assert bound_check("gt", 5.0, 3.0, ReferenceSource.CLOSED_FORM, below=False).passed


def test_check_row_and_criterion() -> None:
    check = CheckResult("d", 1.0, math.inf, ReferenceSource.PRINTED_FORMULA, 0.5, False)

    row = check.to_row("exp")
    criterion = check.criterion()

    assert list(row) == RESULT_COLUMNS
    assert row["reference_source"] == "paper-formula"
    assert row["experiment_id"] == "exp"
    assert criterion == {"id": "d", "pass": False, "measured": 1.0, "reference": "inf", "tolerance": 0.5}


def test_outcome_verdicts_and_frame() -> None:
    # Arrange
    good = CheckResult("a", 1.0, 1.0, ReferenceSource.CLOSED_FORM, 0.0, True)
    suspect = CheckResult("b", 1.0, 1.0, ReferenceSource.MC_ORACLE, 0.0, True, suspect=True)
    bad = CheckResult("c", 2.0, 1.0, ReferenceSource.CLOSED_FORM, 0.0, False)

    # Act
    outcome = ExperimentOutcome("exp", [good, suspect])
    frame = outcome.results_frame()

    # Assert
    assert outcome.passed and outcome.suspect
    assert not ExperimentOutcome("exp", [good, bad]).passed
    assert ExperimentOutcome("exp").passed
    assert list(frame.columns) == RESULT_COLUMNS
    assert frame["check_id"].tolist() == ["a", "b"]


def test_context_streams_stay_in_the_experiment_block() -> None:
    context = ExperimentContext({}, 5, block_offset=3 * BLOCKS_PER_EXPERIMENT)

    assert context.stream(2) == RngStream.block(5, 3 * BLOCKS_PER_EXPERIMENT + 2)
    with pytest.raises(ValueError, match="sub_block"):
        context.stream(BLOCKS_PER_EXPERIMENT)


def test_base_experiment_describe_and_abstract() -> None:
    class Minimal(BaseExperiment):
        experiment_id = "minimal"
        anchor = "a minimal run"
        defaults = {"n": 10.0}

        def execute(self, context):
            return ExperimentOutcome(self.experiment_id)

    assert Minimal().describe() == "minimal: a minimal run [n=10.0]"
    with pytest.raises(TypeError):
        BaseExperiment()  # type: ignore[abstract]


def test_require() -> None:
    require(True, "unused")
    with pytest.raises(ValueError, match="broken"):
        require(False, "broken")


def test_cdf_series() -> None:
    values = np.linspace(0.0, 1.0, 11)

    frame = cdf_series(values, lambda x: np.clip(x, 0, 1), points=11)

    assert isinstance(frame, pd.DataFrame)
    assert list(frame.columns) == ["x", "empirical", "analytic"]
    assert frame["empirical"].iloc[-1] == 1.0
    np.testing.assert_allclose(frame["analytic"], frame["x"])
