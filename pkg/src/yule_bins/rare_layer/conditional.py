"""Occupancy simulation conditioned on the position of the floor(rho)-th split."""

from __future__ import annotations

import logging
import math
from typing import Tuple

import numpy as np

from yule_bins.model_layer.occupancy import ThrowMode, TruncationError, power_truncation, throw_balls
from yule_bins.model_layer.point_process import Rectangle, ScaleDescriptor, empty_bin_process
from yule_bins.model_layer.probabilities import bin_probabilities
from yule_bins.model_layer.rng import RngStream, run_replications
from yule_bins.model_layer.splits import SplitSequence, sample_t_k_conditional, split_window_mass
from yule_bins.stats_layer.samples import EstimateWithCI, mean_estimate

logger = logging.getLogger(__name__)


def conditioned_splits(
    k: int,
    window: Tuple[float, float],
    n_bins: int,
    gen: np.random.Generator,
) -> SplitSequence:
    """Split sequence with t_k drawn from its law restricted to `window`.

    Given t_k = M, the times t_1 < ... < t_{k-1} are M minus the order statistics of k - 1
    unit exponentials conditioned to lie below M; the splits after k are unconditioned.
    """
    if n_bins < k:
        raise ValueError(f"n_bins must be >= k={k}, got {n_bins}")
    t_k = float(sample_t_k_conditional(k, window, gen))
    below = np.sort(-np.log1p(gen.random(k - 1) * np.expm1(-t_k)))
    head = np.append(t_k - below[::-1], t_k)
    idx = np.arange(1, n_bins + 1, dtype=float)
    later = gen.standard_exponential(n_bins - k)
    times = np.concatenate((head, t_k + np.cumsum(later / idx[k:])))
    increments = np.concatenate((idx[:k] * np.diff(head, prepend=0.0), later))
    return SplitSequence(n_bins, increments, times, times - np.log(idx))


def conditional_occupancy_experiment(
    n: float,
    rho: float,
    window: Tuple[float, float],
    x: float,
    alpha: float,
    replications: int,
    rng: RngStream,
    threads: int = 1,
    n_bins: int | None = None,
) -> EstimateWithCI:
    """Unbiased estimate of E(N^{p_alpha}_n([0, x]) 1{t_k in window}), k = floor(rho).

    Each replication samples the splits with t_k restricted to the window, throws Poisson(n)
    balls and counts the empty bins among the first x n^alpha. The mean is scaled by the
    window's probability.

    Raises:
        ValueError: On rho < 1 or a window with no mass.
        TruncationError: If n_bins stops short of x n^alpha.
    """
    if rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    k = int(math.floor(rho))
    mass = split_window_mass(k, window)
    if mass <= 0:
        raise ValueError(f"window {window} has zero mass under the law of t_{k}")
    scale = ScaleDescriptor.power(n, alpha)
    n_bins = n_bins or power_truncation(n, alpha, x)
    if scale.index_bound(x) > n_bins:
        raise TruncationError(n_bins)
    rect = Rectangle(x)

    def replicate(stream: RngStream) -> int:
        gen = stream.generator()
        probvec = bin_probabilities(conditioned_splits(k, window, n_bins, gen), rho)
        occ = throw_balls(probvec, n, ThrowMode.POISSONIZED, gen)
        return empty_bin_process(occ, 0, scale).count_in(rect)

    counts = run_replications(replicate, replications, rng, threads)
    plain = mean_estimate(counts, rng.master_seed, method="mc-conditional")
    logger.debug("window %s mass=%.4g mean empty=%.4g", window, mass, plain.value)
    return EstimateWithCI(
        mass * plain.value, mass * plain.stderr, plain.n_replications, rng.master_seed, plain.method
    )
