"""Throwing balls into the bins and reading off occupancy."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from yule_bins.model_layer.constants import (
    DISTRIBUTION_TRUNCATION_FACTOR,
    MIN_BINS,
    POWER_TRUNCATION_FACTOR,
)
from yule_bins.model_layer.probabilities import BinProbabilityVector, SourceTag
from yule_bins.model_layer.rng import RngStream, as_generator

logger = logging.getLogger(__name__)


class ThrowMode(str, Enum):
    EXACT = "exact"
    POISSONIZED = "poissonized"


class TruncationError(RuntimeError):
    """No empty bin among the first n_bins; the truncation must be enlarged."""

    def __init__(self, n_bins: int):
        super().__init__(f"no empty bin within truncation (n_bins={n_bins})")
        self.n_bins = n_bins


@dataclass(frozen=True)
class OccupancyCounts:
    counts: np.ndarray = field(repr=False)
    """Balls per bin, bins 1..n_bins."""
    tail_count: int
    """Balls beyond bin n_bins."""
    n_balls_requested: int
    """n in exact mode, the Poisson mean in poissonized mode."""
    mode: ThrowMode
    realized_total: int

    def __post_init__(self) -> None:
        if int(np.sum(self.counts)) + self.tail_count != self.realized_total:
            raise ValueError("counts and tail_count must add up to realized_total")
        if self.mode is ThrowMode.EXACT and self.realized_total != self.n_balls_requested:
            raise ValueError("exact mode must place every requested ball")

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)


def throw_balls(
    probvec: BinProbabilityVector,
    n_balls: int,
    mode: ThrowMode | str,
    rng: RngStream | np.random.Generator,
) -> OccupancyCounts:
    """Place `n_balls` balls according to `probvec`.

    Exact mode on a Yule vector draws exponential(rho) locations and binary-searches them into
    the split-time partition, so landings beyond the last split are counted as tail. Exact mode
    on a deterministic vector draws one multinomial. Poissonized mode draws independent
    Poisson(n_balls * p) counts per bin and for the tail.

    Args:
        probvec: Probability vector.
        n_balls: Number of balls (Poisson mean in poissonized mode).
        mode: ThrowMode or its string value.
        rng: Random stream.

    Returns:
        OccupancyCounts: Per-bin counts and tail count.
    """
    mode = ThrowMode(mode)
    if n_balls < 0:
        raise ValueError(f"n_balls must be non-negative, got {n_balls}")
    gen = as_generator(rng)
    n_bins = probvec.n_bins

    if mode is ThrowMode.POISSONIZED:
        counts = gen.poisson(n_balls * probvec.probs).astype(np.int64)
        tail = int(gen.poisson(n_balls * probvec.tail_mass))
        return OccupancyCounts(counts, tail, n_balls, mode, int(counts.sum()) + tail)

    if probvec.source_tag is SourceTag.YULE and probvec.edges is not None:
        locations = gen.standard_exponential(n_balls) / probvec.rho
        landing = np.searchsorted(probvec.edges, locations, side="left")
        histogram = np.bincount(landing, minlength=n_bins + 1).astype(np.int64)
        counts, tail = histogram[:n_bins], int(histogram[n_bins])
    else:
        pvals = np.append(probvec.probs, probvec.tail_mass)
        histogram = gen.multinomial(n_balls, pvals / pvals.sum()).astype(np.int64)
        counts, tail = histogram[:n_bins], int(histogram[n_bins])
    return OccupancyCounts(counts, tail, n_balls, mode, n_balls)


def coupled_throws(
    probvec: BinProbabilityVector,
    n_small: int,
    n_large: int,
    rng: RngStream | np.random.Generator,
) -> Tuple[OccupancyCounts, OccupancyCounts]:
    """Exact throws of `n_small` and `n_large` balls that share their first `n_small` balls.

    On a Yule vector both throws restart from the same generator state, so the larger throw
    repeats the ball locations of the smaller one and adds its own. Multinomial throws have no
    such prefix; there the extra balls are thrown separately and added.
    """
    if not 0 <= n_small <= n_large:
        raise ValueError(f"need 0 <= n_small <= n_large, got {n_small}, {n_large}")
    gen = as_generator(rng)
    if probvec.source_tag is SourceTag.YULE and probvec.edges is not None:
        state = gen.bit_generator.state
        small = throw_balls(probvec, n_small, ThrowMode.EXACT, gen)
        gen.bit_generator.state = state
        return small, throw_balls(probvec, n_large, ThrowMode.EXACT, gen)

    small = throw_balls(probvec, n_small, ThrowMode.EXACT, gen)
    extra = throw_balls(probvec, n_large - n_small, ThrowMode.EXACT, gen)
    large = OccupancyCounts(
        small.counts + extra.counts,
        small.tail_count + extra.tail_count,
        n_large,
        ThrowMode.EXACT,
        n_large,
    )
    return small, large


def coupled_violations(
    probvec: BinProbabilityVector,
    n_small: int,
    n_large: int,
    rng: RngStream | np.random.Generator,
) -> int:
    """Bins empty after the larger coupled throw but occupied after the smaller; always 0."""
    small, large = coupled_throws(probvec, n_small, n_large, rng)
    return int(np.count_nonzero((large.counts == 0) & (small.counts > 0)))


def first_empty_index(occ: OccupancyCounts) -> int:
    """Smallest 1-based index of an empty bin.

    Raises:
        TruncationError: If every sampled bin holds at least one ball.
    """
    empty = np.flatnonzero(occ.counts == 0)
    if empty.size == 0:
        raise TruncationError(occ.n_bins)
    return int(empty[0]) + 1


def distribution_truncation(n: float, rho: float, x_max: float) -> int:
    """Bins needed to resolve the empty-bin process on [0, x_max] at scale n^(1/(rho+2))."""
    return max(MIN_BINS, math.ceil(DISTRIBUTION_TRUNCATION_FACTOR * x_max * n ** (1 / (rho + 2))))


def power_truncation(n: float, alpha: float, x_max: float) -> int:
    """Bins needed to resolve the window [0, x_max n^alpha]."""
    return max(1, math.ceil(POWER_TRUNCATION_FACTOR * x_max * n**alpha))
