import math

import numpy as np
import pytest

from yule_bins.model_layer.constants import DECOMPOSITION_RTOL, NORMALIZATION_ATOL
from yule_bins.model_layer.probabilities import (
    SourceTag,
    bin_probabilities,
    deterministic_power_law,
)
from yule_bins.model_layer.rng import RngStream
from yule_bins.model_layer.splits import sample_splits, splits_from_increments


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_yule_vector_invariants(rho: float) -> None:
    """Telescoping normalization and the W/Z decomposition hold to 1e-12."""

    # Arrange
    splits = sample_splits(10000, RngStream(31))

    # Act
    probvec = bin_probabilities(splits, rho)

    # Assert
    assert probvec.source_tag is SourceTag.YULE
    assert probvec.n_bins == 10000
    assert probvec.normalization_error() <= NORMALIZATION_ATOL
    assert probvec.decomposition_error() <= DECOMPOSITION_RTOL
    assert probvec.check_invariants()


def test_yule_vector_closed_values() -> None:
    # Arrange
    splits = splits_from_increments(np.array([1.0, 2.0]))  # t_1 = 1, t_2 = 2

    # Act
    probvec = bin_probabilities(splits, 2.0)

    # Assert
    assert probvec.probs[0] == pytest.approx(1 - math.exp(-2.0))
    assert probvec.probs[1] == pytest.approx(math.exp(-2.0) * (1 - math.exp(-2.0)))
    assert probvec.tail_mass == pytest.approx(math.exp(-4.0))
    np.testing.assert_allclose(probvec.w_values, [1.0, 2.0 * math.exp(-1.0)])
    np.testing.assert_allclose(probvec.z_values, [1 - math.exp(-2.0), 2 * (1 - math.exp(-2.0))])


def test_yule_vector_rejects_rho() -> None:
    splits = sample_splits(5, RngStream(1))

    with pytest.raises(ValueError, match="rho"):
        bin_probabilities(splits, 0.0)


def test_power_law_tail_matches_expansion() -> None:
    """zeta(2, n+1) / zeta(2) = (6/pi^2)(1/n - 1/(2n^2) + 1/(6n^3) - ...)."""

    # Arrange
    n = 10**6

    # Act
    probvec = deterministic_power_law(1.0, 2.0, n)

    # Assert
    three_terms = 6 / math.pi**2 * (1 / n - 1 / (2 * n**2) + 1 / (6 * n**3))
    assert probvec.tail_mass == pytest.approx(three_terms, rel=1e-9)
    assert probvec.tail_mass == pytest.approx(6 / (math.pi**2 * n), rel=1e-6)
    assert probvec.power_coeff == pytest.approx(6 / math.pi**2)
    assert probvec.normalization_error() <= NORMALIZATION_ATOL
    assert probvec.check_invariants()


def test_power_law_coefficient_cancels() -> None:
    a = deterministic_power_law(1.0, 3.0, 50)
    b = deterministic_power_law(7.5, 3.0, 50)

    np.testing.assert_array_equal(a.probs, b.probs)
    assert a.delta == 3.0


def test_power_law_has_no_decomposition() -> None:
    probvec = deterministic_power_law(1.0, 2.0, 10)

    with pytest.raises(ValueError, match="Yule"):
        probvec.decomposition_error()


@pytest.mark.parametrize(
    "args, message",
    [((1.0, 1.0, 10), "delta"), ((0.0, 2.0, 10), "alpha_coeff"), ((1.0, 2.0, 0), "n_bins")],
)
def test_power_law_rejects(args, message: str) -> None:
    with pytest.raises(ValueError, match=message):
        deterministic_power_law(*args)
