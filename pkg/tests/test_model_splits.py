import math

import numpy as np
import pytest
from scipy import stats

from yule_bins.model_layer.rng import RngStream
from yule_bins.model_layer.splits import (
    SplitSequence,
    d_rho_truncation_oracle,
    sample_d_rho,
    sample_splits,
    sample_t_k_conditional,
    split_window_mass,
    splits_from_increments,
)


@pytest.fixture
def splits() -> SplitSequence:
    return sample_splits(1000, RngStream(5))


def test_sample_splits_invariants(splits: SplitSequence) -> None:
    """Times follow t_i = t_{i-1} + E_i / i and M_i = t_i - log i."""

    # Act
    ok = splits.check_invariants()

    # Assert
    assert ok
    assert splits.n_bins == 1000
    assert splits.times[0] == pytest.approx(splits.increments[0])
    np.testing.assert_allclose(splits.martingale, splits.times - np.log(splits.indices))


def test_w_values_start_at_one(splits: SplitSequence) -> None:
    assert splits.w_values[0] == 1.0
    assert splits.w_values[1] == pytest.approx(2.0 * math.exp(-splits.times[0]))
    assert splits.w_limit_surrogate == pytest.approx(math.exp(-splits.martingale[-1]))


def test_splits_from_increments_rebuilds_times() -> None:
    # Arrange
    increments = np.array([1.0, 2.0, 3.0])

    # Act
    rebuilt = splits_from_increments(increments)

    # Assert
    np.testing.assert_allclose(rebuilt.times, [1.0, 2.0, 3.0])
    assert rebuilt.check_invariants()


@pytest.mark.parametrize("bad", [np.array([]), np.array([1.0, -1.0])])
def test_splits_from_increments_rejects(bad: np.ndarray) -> None:
    with pytest.raises(ValueError):
        splits_from_increments(bad)


def test_sample_splits_rejects_zero_bins() -> None:
    with pytest.raises(ValueError, match="n_bins"):
        sample_splits(0, RngStream(1))


def test_t_n_mean_is_harmonic_number() -> None:
    """E(t_10) = H_10; 4000 draws keep the check within 4 sigma."""

    # Arrange
    n, reps = 10, 4000
    gen = RngStream(17).generator()

    # Act
    values = np.array([sample_splits(n, gen).times[-1] for _ in range(reps)])

    # Assert
    harmonic = sum(1.0 / i for i in range(1, n + 1))
    variance = sum(1.0 / i**2 for i in range(1, n + 1))
    assert abs(values.mean() - harmonic) < 4 * math.sqrt(variance / reps)


def test_split_window_mass_matches_cdf() -> None:
    lower, upper = 1.0, 3.0
    expected = (1 - math.exp(-upper)) ** 2 - (1 - math.exp(-lower)) ** 2

    assert split_window_mass(2, (lower, upper)) == pytest.approx(expected, rel=1e-12)
    assert split_window_mass(2, (0.0, math.inf)) == pytest.approx(1.0)


def test_split_window_mass_far_tail_keeps_precision() -> None:
    # 1 - (1 - e^-40)^2 ~ 2 e^-40 would cancel to 0 through the CDF
    assert split_window_mass(2, (40.0, math.inf)) == pytest.approx(2 * math.exp(-40.0), rel=1e-9)


@pytest.mark.parametrize("window", [(0.5, 2.0), (6.0, 8.0), (30.0, math.inf)])
def test_sample_t_k_conditional_stays_in_window(window) -> None:
    draws = sample_t_k_conditional(2, window, RngStream(3), size=2000)

    assert np.all(draws >= window[0])
    assert np.all(draws <= window[1])


def test_sample_t_k_conditional_law() -> None:
    """Conditioned draws follow the truncated law (1 - e^-x)^k on the window."""

    # Arrange
    k, window = 2, (1.0, 4.0)
    mass = split_window_mass(k, window)

    def cdf(x):
        return ((1 - np.exp(-x)) ** k - (1 - math.exp(-window[0])) ** k) / mass

    # Act
    draws = sample_t_k_conditional(k, window, RngStream(9), size=5000)
    result = stats.kstest(draws, cdf)

    # Assert
    assert result.pvalue > 0.001


def test_sample_t_k_conditional_single_draw_is_float() -> None:
    value = sample_t_k_conditional(1, (0.0, 1.0), RngStream(1))

    assert isinstance(value, float)
    assert 0.0 <= value <= 1.0


@pytest.mark.parametrize("window", [(2.0, 1.0), (-1.0, 1.0)])
def test_sample_t_k_conditional_rejects_windows(window) -> None:
    with pytest.raises(ValueError, match="window"):
        sample_t_k_conditional(2, window, RngStream(1))


def test_sample_d_rho_integer_case_mean() -> None:
    """D_2 = G^2 with G ~ Gamma(3): E D_2 = Var G + (E G)^2 = 12."""

    # Act
    draws = sample_d_rho(2.0, RngStream(4), size=200000)

    # Assert
    # Var(G^2) = E G^4 - 144 = 360 - 144 = 216
    assert abs(draws.mean() - 12.0) < 4 * math.sqrt(216.0 / draws.size)


def test_sample_d_rho_rejects_small_rho() -> None:
    with pytest.raises(ValueError, match="rho"):
        sample_d_rho(0.5, RngStream(1))


@pytest.mark.parametrize("method", ["order-statistic", "direct"])
def test_truncation_oracle_matches_gamma_law(method: str) -> None:
    """At N = 2000 the oracle is already close to the Gamma(k+1)^rho law."""

    # Arrange
    rho = 1.5
    size = 400 if method == "direct" else 4000

    # Act
    oracle = d_rho_truncation_oracle(rho, 2000, RngStream(21), size, method=method)
    reference = sample_d_rho(rho, RngStream(22), size=size)
    result = stats.ks_2samp(oracle, reference)

    # Assert
    assert result.pvalue > 0.001


def test_truncation_oracle_rejects() -> None:
    with pytest.raises(ValueError, match="n_terms"):
        d_rho_truncation_oracle(2.0, 2, RngStream(1), 10)
    with pytest.raises(ValueError, match="method"):
        d_rho_truncation_oracle(2.0, 10, RngStream(1), 10, method="other")
