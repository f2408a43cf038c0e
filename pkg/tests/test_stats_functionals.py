import math

import numpy as np
import pytest

from yule_bins.model_layer.occupancy import TruncationError
from yule_bins.model_layer.point_process import Rectangle, ScaleDescriptor, ScaledPointProcess
from yule_bins.model_layer.probabilities import bin_probabilities, deterministic_power_law
from yule_bins.model_layer.rng import RngStream
from yule_bins.model_layer.splits import sample_splits
from yule_bins.stats_layer.functionals import (
    batched_dispersion,
    dispersion_index,
    empirical_laplace_functional,
    lln_functional,
    lln_limit,
)


def _process(points) -> ScaledPointProcess:
    return ScaledPointProcess(1, np.asarray(points, dtype=float), ScaleDescriptor(1.0, 1.0))


def test_empirical_laplace_functional() -> None:
    # Arrange
    processes = [_process([0.1, 0.5])] * 100

    # Act
    est = empirical_laplace_functional(processes, Rectangle(0.3), theta=0.7)

    # Assert
    assert est.value == pytest.approx(math.exp(-0.7))
    assert est.stderr == pytest.approx(0.0, abs=1e-15)
    assert est.n_replications == 100


def test_empirical_laplace_functional_rejects() -> None:
    with pytest.raises(ValueError, match="at least 100"):
        empirical_laplace_functional([_process([0.1])] * 99, Rectangle(1.0), 1.0)
    with pytest.raises(ValueError, match="theta"):
        empirical_laplace_functional([_process([0.1])] * 100, Rectangle(1.0), -1.0)


def test_dispersion_index() -> None:
    assert dispersion_index([1.0, 2.0, 3.0]) == pytest.approx(0.5)
    with pytest.raises(ValueError, match="zero mean"):
        dispersion_index([0, 0, 0])


def test_batched_dispersion_of_poisson_counts() -> None:
    counts = np.random.default_rng(11).poisson(4.0, size=4000)

    est = batched_dispersion(counts, n_batches=20)

    assert est.value == pytest.approx(1.0, abs=0.15)
    assert est.stderr > 0
    with pytest.raises(ValueError, match="batch"):
        batched_dispersion(counts[:10], n_batches=20)


def test_lln_functional_counts_every_bin_in_a_tall_rectangle() -> None:
    """With kappa = 1/2 and n = 1e4 the x-range [0, 10] holds bins 1..1000."""

    # Arrange
    probvec = bin_probabilities(sample_splits(2000, RngStream(2)), 1.0)
    rect = Rectangle(10.0)

    # Act
    value = lln_functional(probvec, 1e4, 0.5, rect, theta=2.0)

    # Assert
    assert value == pytest.approx(2.0 * 1000 / 100.0)


def test_lln_functional_rejects() -> None:
    probvec = bin_probabilities(sample_splits(100, RngStream(2)), 1.0)

    with pytest.raises(ValueError, match="kappa"):
        lln_functional(probvec, 1e4, 0.3, Rectangle(1.0), 1.0)
    with pytest.raises(TruncationError):
        lln_functional(probvec, 1e4, 0.5, Rectangle(2.0), 1.0)
    with pytest.raises(ValueError, match="Yule"):
        lln_functional(deterministic_power_law(1.0, 2.0, 10), 1e4, 0.5, Rectangle(1.0), 1.0)


def test_lln_limit() -> None:
    assert lln_limit(Rectangle(1.0, 2.0), 1.0, 1.0, 0.5) == pytest.approx(4.0 / 3.0)
    with pytest.raises(ValueError, match="w_value"):
        lln_limit(Rectangle(1.0, 2.0), 1.0, 1.0, 0.0)


def test_empirical_laplace_functional_is_antitone() -> None:
    """Larger theta or a larger rectangle can only lower E exp(-theta N(rect))."""

    # Arrange
    gen = np.random.default_rng(31)
    scale = ScaleDescriptor(1.0, 1.0)
    processes = [
        ScaledPointProcess(2, gen.uniform(0.0, 2.0, size=(gen.poisson(6.0), 2)), scale)
        for _ in range(300)
    ]
    square = Rectangle(1.0, 1.0)
    thetas = [0.0, 0.1, 0.5, 1.0, 3.0]
    nested = [Rectangle(0.5, 0.5), Rectangle(1.0, 0.5), Rectangle(1.0, 1.5), Rectangle(2.0, 2.0)]

    # Act
    by_theta = [empirical_laplace_functional(processes, square, t).value for t in thetas]
    by_rect = [empirical_laplace_functional(processes, rect, 0.4).value for rect in nested]

    # Assert
    assert by_theta[0] == 1.0
    assert all(b <= a for a, b in zip(by_theta, by_theta[1:]))
    assert all(b <= a for a, b in zip(by_rect, by_rect[1:]))
    assert by_rect[-1] < by_rect[0]
