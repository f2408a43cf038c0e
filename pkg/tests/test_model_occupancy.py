import math

import numpy as np
import pytest

from yule_bins.model_layer.occupancy import (
    OccupancyCounts,
    ThrowMode,
    TruncationError,
    coupled_throws,
    coupled_violations,
    distribution_truncation,
    first_empty_index,
    power_truncation,
    throw_balls,
)
from yule_bins.model_layer.probabilities import (
    BinProbabilityVector,
    bin_probabilities,
    deterministic_power_law,
)
from yule_bins.model_layer.rng import RngStream
from yule_bins.model_layer.splits import sample_splits


@pytest.fixture
def probvec() -> BinProbabilityVector:
    return bin_probabilities(sample_splits(200, RngStream(12)), 1.0)


def test_exact_throw_places_every_ball(probvec: BinProbabilityVector) -> None:
    # Act
    occ = throw_balls(probvec, 5000, ThrowMode.EXACT, RngStream(1))

    # Assert
    assert occ.mode is ThrowMode.EXACT
    assert occ.realized_total == 5000
    assert int(occ.counts.sum()) + occ.tail_count == 5000
    assert occ.n_bins == 200


def test_exact_throw_first_bin_is_binomial(probvec: BinProbabilityVector) -> None:
    """Bin 1 receives Binomial(n, P_1) balls."""

    # Arrange
    n = 20000
    p = probvec.probs[0]

    # Act
    occ = throw_balls(probvec, n, "exact", RngStream(2))

    # Assert
    assert abs(occ.counts[0] - n * p) < 4 * math.sqrt(n * p * (1 - p))


def test_poissonized_throw_totals(probvec: BinProbabilityVector) -> None:
    occ = throw_balls(probvec, 1000, "poissonized", RngStream(3))

    assert occ.mode is ThrowMode.POISSONIZED
    assert occ.n_balls_requested == 1000
    assert occ.realized_total == int(occ.counts.sum()) + occ.tail_count


def test_exact_throw_on_power_law_uses_multinomial() -> None:
    probvec = deterministic_power_law(1.0, 2.0, 50)

    occ = throw_balls(probvec, 300, ThrowMode.EXACT, RngStream(4))

    assert occ.realized_total == 300
    assert occ.counts.shape == (50,)


def test_throw_rejects_negative_balls(probvec: BinProbabilityVector) -> None:
    with pytest.raises(ValueError, match="n_balls"):
        throw_balls(probvec, -1, ThrowMode.EXACT, RngStream(1))


def test_same_stream_same_occupancy(probvec: BinProbabilityVector) -> None:
    a = throw_balls(probvec, 1000, ThrowMode.EXACT, RngStream(9, 4))
    b = throw_balls(probvec, 1000, ThrowMode.EXACT, RngStream(9, 4))

    np.testing.assert_array_equal(a.counts, b.counts)


def test_first_empty_index() -> None:
    # Arrange
    occ = OccupancyCounts(np.array([3, 1, 0, 2, 0]), 0, 6, ThrowMode.EXACT, 6)

    # Act
    first = first_empty_index(occ)

    # Assert
    assert first == 3


def test_first_empty_index_truncation() -> None:
    occ = OccupancyCounts(np.array([1, 1]), 4, 6, ThrowMode.EXACT, 6)

    with pytest.raises(TruncationError) as info:
        first_empty_index(occ)

    assert info.value.n_bins == 2


def test_occupancy_counts_validation() -> None:
    with pytest.raises(ValueError, match="realized_total"):
        OccupancyCounts(np.array([1, 1]), 0, 3, ThrowMode.POISSONIZED, 3)
    with pytest.raises(ValueError, match="exact mode"):
        OccupancyCounts(np.array([1, 1]), 0, 3, ThrowMode.EXACT, 2)


def test_truncation_sizes() -> None:
    assert distribution_truncation(1e6, 1.0, 0.5) == math.ceil(10 * 0.5 * 1e6 ** (1 / 3))
    assert distribution_truncation(10.0, 1.0, 0.1) == 64
    assert power_truncation(1e4, 0.5, 1.0) == 400


def test_added_balls_never_empty_a_bin() -> None:
    """Throws of n and n + m balls from one stream share their first n balls."""

    # Arrange
    probvec = bin_probabilities(sample_splits(400, RngStream(12)), 1.0)

    # Act
    small = throw_balls(probvec, 1000, ThrowMode.EXACT, RngStream(9))
    large = throw_balls(probvec, 4000, ThrowMode.EXACT, RngStream(9))

    # Assert
    assert np.all(large.counts >= small.counts)
    assert large.tail_count >= small.tail_count
    assert np.count_nonzero((large.counts == 0) & (small.counts > 0)) == 0
    assert np.count_nonzero(large.counts == 0) <= np.count_nonzero(small.counts == 0)


@pytest.mark.parametrize("source", ["yule", "power"])
def test_coupled_throws_dominate(source: str) -> None:
    # Arrange
    if source == "yule":
        probvec = bin_probabilities(sample_splits(300, RngStream(5)), 2.0)
    else:
        probvec = deterministic_power_law(1.0, 2.0, 300)
    gen = RngStream(6).generator()

    # Act
    small, large = coupled_throws(probvec, 500, 2500, gen)

    # Assert
    assert small.realized_total == 500
    assert large.realized_total == 2500
    assert np.all(large.counts >= small.counts)
    assert coupled_violations(probvec, 500, 2500, RngStream(7)) == 0


def test_coupled_throws_reject_shrinking_throw(probvec: BinProbabilityVector) -> None:
    with pytest.raises(ValueError, match="n_small <= n_large"):
        coupled_throws(probvec, 10, 5, RngStream(1))
