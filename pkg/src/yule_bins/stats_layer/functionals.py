"""Empirical functionals of replicated point processes and count data."""

from __future__ import annotations

import logging
import math
from typing import Iterable, Sequence

import numpy as np

from yule_bins.analytic_layer.limit_laws import power_measure
from yule_bins.model_layer.constants import MIN_LAPLACE_REPLICATIONS
from yule_bins.model_layer.occupancy import TruncationError
from yule_bins.model_layer.point_process import Rectangle, ScaledPointProcess, count_in_rectangles
from yule_bins.model_layer.probabilities import BinProbabilityVector, SourceTag
from yule_bins.stats_layer.samples import EstimateWithCI, mean_estimate

logger = logging.getLogger(__name__)


def empirical_laplace_functional(
    processes: Iterable[ScaledPointProcess],
    rect: Rectangle,
    theta: float,
    seed: int = 0,
) -> EstimateWithCI:
    """Mean of exp(-theta N(rect)) across replications, N(f) taken as the positive sum of f.

    Raises:
        ValueError: With fewer than 100 replications or a negative theta.
    """
    if theta < 0:
        raise ValueError(f"theta must be non-negative, got {theta}")
    counts = count_in_rectangles(processes, rect)
    if counts.size < MIN_LAPLACE_REPLICATIONS:
        raise ValueError(
            f"need at least {MIN_LAPLACE_REPLICATIONS} replications, got {counts.size}"
        )
    return mean_estimate(np.exp(-theta * counts), seed, method="mc-laplace")


def dispersion_index(counts: Sequence[float]) -> float:
    """Sample variance over sample mean.

    Raises:
        ValueError: With fewer than two counts or a zero mean.
    """
    arr = np.asarray(counts, dtype=float)
    if arr.size < 2:
        raise ValueError(f"dispersion index needs at least 2 counts, got {arr.size}")
    mean = arr.mean()
    if mean == 0:
        raise ValueError("dispersion index is undefined for a zero mean")
    return float(arr.var(ddof=1) / mean)


def batched_dispersion(counts: Sequence[float], n_batches: int = 20, seed: int = 0) -> EstimateWithCI:
    """Dispersion index of the whole sample with a batch-means standard error."""
    arr = np.asarray(counts, dtype=float)
    if n_batches < 2 or arr.size < 2 * n_batches:
        raise ValueError(f"need at least two counts per batch for {n_batches} batches")
    per_batch = np.asarray([dispersion_index(b) for b in np.array_split(arr, n_batches)])
    stderr = float(per_batch.std(ddof=1) / math.sqrt(n_batches))
    return EstimateWithCI(dispersion_index(arr), stderr, int(arr.size), seed, "batch-means")


def lln_functional(
    probvec: BinProbabilityVector,
    n: float,
    kappa: float,
    rect: Rectangle,
    theta: float,
) -> float:
    """n^{1-(rho+2)kappa} sum_i theta 1_rect(i / n^kappa, n P_i).

    Raises:
        ValueError: If kappa <= 1/(rho+2) or probvec is not a Yule vector.
        TruncationError: If probvec stops short of the rectangle's x-range.
    """
    if probvec.source_tag is not SourceTag.YULE:
        raise ValueError("the law of large numbers functional needs a Yule vector")
    rho = probvec.rho
    if kappa <= 1.0 / (rho + 2.0):
        raise ValueError(f"kappa must exceed 1/(rho+2)={1.0 / (rho + 2.0):.6g}, got {kappa}")
    if theta == 0 or rect.is_empty():
        return 0.0

    scale = n**kappa
    last = math.floor(rect.x_max * scale)
    if last > probvec.n_bins:
        raise TruncationError(probvec.n_bins)
    first = max(1, math.ceil(rect.x_min * scale))
    idx = np.arange(first, last + 1, dtype=float)
    points = np.column_stack((idx / scale, n * probvec.probs[first - 1 : last]))
    hits = int(np.count_nonzero(rect.contains(points)))
    return theta * hits / n ** ((rho + 2.0) * kappa - 1.0)


def lln_limit(rect: Rectangle, theta: float, rho: float, w_value: float) -> float:
    """theta (W^{-rho} / rho) times the x^{rho+1} measure of the rectangle."""
    if w_value <= 0:
        raise ValueError(f"w_value must be positive, got {w_value}")
    return theta * w_value ** (-rho) / rho * power_measure(rect, rho)
