"""Yule split times and the random factors derived from them.

The i-th split of a rate-one Yule process started from one individual happens at
t_i = sum_{j<=i} E_j / j with E_j i.i.d. unit exponentials. The i-th bin is the interval
(t_{i-1}, t_i].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from yule_bins.model_layer.constants import TIMES_ATOL, TIMES_RTOL
from yule_bins.model_layer.rng import RngStream, as_generator

logger = logging.getLogger(__name__)


# ----------------------------------------------------------------------------
# Split sequence
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSequence:
    """Split times of the first `n_bins` splits. Arrays are 0-based; entry k is index k + 1."""

    n_bins: int
    """Number of sampled splits."""
    increments: np.ndarray = field(repr=False)
    """The unit exponential variates E_i."""
    times: np.ndarray = field(repr=False)
    """Split times t_i."""
    martingale: np.ndarray = field(repr=False)
    """M_i = t_i - log i."""

    def __post_init__(self) -> None:
        assert self.n_bins >= 1, "a split sequence holds at least one split"
        for name in ("increments", "times", "martingale"):
            if len(getattr(self, name)) != self.n_bins:
                raise ValueError(f"{name} must have length n_bins={self.n_bins}")

    @property
    def indices(self) -> np.ndarray:
        """1-based split indices as floats."""
        return np.arange(1, self.n_bins + 1, dtype=float)

    @property
    def previous_times(self) -> np.ndarray:
        """t_{i-1} with t_0 = 0."""
        return np.concatenate(([0.0], self.times[:-1]))

    @property
    def w_values(self) -> np.ndarray:
        """W_i = i e^{-t_{i-1}}; W_1 = 1 and W_i -> W_inf almost surely."""
        return self.indices * np.exp(-self.previous_times)

    @property
    def w_limit_surrogate(self) -> float:
        """e^{-M_N} at the largest sampled index, the stand-in for W_inf."""
        return float(math.exp(-self.martingale[-1]))

    def check_invariants(self) -> bool:
        """True when times follow the recurrence and the martingale matches."""
        idx = self.indices
        steps = np.diff(self.times, prepend=0.0)
        recurrence = np.allclose(steps, self.increments / idx, rtol=TIMES_RTOL, atol=TIMES_ATOL)
        increasing = bool(np.all(np.diff(self.times) > 0))
        martingale = np.allclose(self.martingale, self.times - np.log(idx), rtol=0, atol=1e-12)
        return recurrence and increasing and martingale


def sample_splits(n_bins: int, rng: RngStream | np.random.Generator) -> SplitSequence:
    """Sample the first `n_bins` split times.

    Args:
        n_bins: Number of splits, at least 1.
        rng: Stream (or positioned generator) supplying the exponential increments.

    Returns:
        SplitSequence: increments, times and martingale values.

    Raises:
        ValueError: If n_bins < 1.
    """
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    gen = as_generator(rng)
    increments = gen.standard_exponential(n_bins)
    idx = np.arange(1, n_bins + 1, dtype=float)
    times = np.cumsum(increments / idx)
    martingale = times - np.log(idx)
    return SplitSequence(n_bins, increments, times, martingale)


def splits_from_increments(increments: np.ndarray) -> SplitSequence:
    """Rebuild a split sequence from stored increments."""
    increments = np.asarray(increments, dtype=float)
    if increments.ndim != 1 or increments.size == 0:
        raise ValueError("increments must be a non-empty 1-D array")
    if np.any(increments <= 0):
        raise ValueError("increments must be positive")
    idx = np.arange(1, increments.size + 1, dtype=float)
    times = np.cumsum(increments / idx)
    return SplitSequence(increments.size, increments, times, times - np.log(idx))


# ----------------------------------------------------------------------------
# Conditional sampling of t_k
# ----------------------------------------------------------------------------


def _split_cdf(x: float, k: int) -> float:
    """(1 - e^{-x})^k."""
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return float(np.exp(k * np.log(-np.expm1(-x))))


def _split_sf(x: float, k: int) -> float:
    """1 - (1 - e^{-x})^k without cancellation for large x."""
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return float(-np.expm1(k * np.log1p(-np.exp(-x))))


def split_window_mass(k: int, window: Tuple[float, float]) -> float:
    """P(t_k in window) under the exact law (1 - e^{-x})^k."""
    lower, upper = window
    if _split_cdf(upper, k) <= 0.5:
        return _split_cdf(upper, k) - _split_cdf(lower, k)
    return _split_sf(lower, k) - _split_sf(upper, k)


def sample_t_k_conditional(
    k: int,
    window: Tuple[float, float],
    rng: RngStream | np.random.Generator,
    size: int | None = None,
) -> float | np.ndarray:
    """Exact inverse-CDF sample of t_k conditioned on t_k in `window`.

    Windows in the lower half of the law are inverted through the CDF, windows in the upper
    half through the survival function, so that far-tail windows keep full precision.

    Args:
        k: Split index, at least 1.
        window: (lower, upper) with 0 <= lower < upper <= inf.
        rng: Random stream.
        size: Number of draws; None returns a single float.

    Raises:
        ValueError: On an empty window or one carrying no probability mass.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    lower, upper = float(window[0]), float(window[1])
    if not 0.0 <= lower < upper:
        raise ValueError(f"window must satisfy 0 <= lower < upper, got ({lower}, {upper})")
    if split_window_mass(k, (lower, upper)) <= 0.0:
        raise ValueError(f"window ({lower}, {upper}) has zero mass under the law of t_{k}")

    gen = as_generator(rng)
    u = gen.random(size)
    if _split_cdf(upper, k) <= 0.5:
        f_lo, f_hi = _split_cdf(lower, k), _split_cdf(upper, k)
        level = f_lo + (f_hi - f_lo) * u
        draws = -np.log1p(-np.power(level, 1.0 / k))
    else:
        s_hi, s_lo = _split_sf(upper, k), _split_sf(lower, k)
        level = s_hi + (s_lo - s_hi) * u
        with np.errstate(divide="ignore"):
            draws = -np.log(-np.expm1(np.log1p(-level) / k))
    draws = np.clip(draws, lower, upper)
    if size is None:
        return float(draws)
    return np.asarray(draws)


# ----------------------------------------------------------------------------
# The rare-event factor D_rho
# ----------------------------------------------------------------------------


def _check_rho_ge_one(rho: float) -> int:
    if rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    return int(math.floor(rho))


def sample_d_rho(
    rho: float, rng: RngStream | np.random.Generator, size: int | None = None
) -> float | np.ndarray:
    """Sample D_rho = exp(-rho [M_inf - M_k - log k]) with k = floor(rho).

    After the k-th split the population holds k + 1 individuals, whose limit martingale is
    Gamma(k + 1, 1) and independent of t_k; hence D_rho = G^rho with G ~ Gamma(k + 1, 1).
    """
    k = _check_rho_ge_one(rho)
    gen = as_generator(rng)
    draws = np.power(gen.gamma(k + 1.0, 1.0, size), rho)
    if size is None:
        return float(draws)
    return np.asarray(draws)


def d_rho_truncation_oracle(
    rho: float,
    n_terms: int,
    rng: RngStream | np.random.Generator,
    size: int,
    method: str = "order-statistic",
) -> np.ndarray:
    """Samples of exp(-rho [M_N - M_k - log k]) at finite N = n_terms.

    M_N - M_k - log k = t_N - t_k - log N. Two constructions are offered:

    * ``direct`` sums E_i / i for i = k+1..N, one replication at a time.
    * ``order-statistic`` uses that t_N - t_k is the (N-k)-th order statistic of N unit
      exponentials, so e^{-(t_N - t_k)} ~ Beta(k + 1, N - k).
    """
    k = _check_rho_ge_one(rho)
    if n_terms <= k:
        raise ValueError(f"n_terms must exceed floor(rho)={k}, got {n_terms}")
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    gen = as_generator(rng)

    if method == "order-statistic":
        v = gen.beta(k + 1.0, float(n_terms - k), size)
        return np.power(n_terms * v, rho)
    if method == "direct":
        weights = 1.0 / np.arange(k + 1, n_terms + 1, dtype=float)
        gaps = np.empty(size)
        for r in range(size):
            gaps[r] = np.dot(gen.standard_exponential(weights.size), weights)
        return np.exp(-rho * (gaps - math.log(n_terms)))
    raise ValueError(f"unknown oracle method {method!r}; use 'direct' or 'order-statistic'")
