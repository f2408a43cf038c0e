"""Scaled point processes built from occupancy and probability vectors."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from yule_bins.model_layer.occupancy import OccupancyCounts
from yule_bins.model_layer.probabilities import BinProbabilityVector, SourceTag

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Rectangle:
    """Closed rectangle [x_min, x_max] x [y_min, y_max]; 1-D processes only use the x-range."""

    x_max: float
    y_max: float = math.inf
    x_min: float = 0.0
    y_min: float = 0.0

    def __post_init__(self) -> None:
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise ValueError(f"degenerate rectangle bounds: {self}")

    def is_empty(self) -> bool:
        return self.x_min == self.x_max or self.y_min == self.y_max

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of the points inside; 1-D input is tested against the x-range only."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            return (points >= self.x_min) & (points <= self.x_max)
        x, y = points[:, 0], points[:, 1]
        return (x >= self.x_min) & (x <= self.x_max) & (y >= self.y_min) & (y <= self.y_max)

    def overlaps(self, other: "Rectangle") -> bool:
        """True when the interiors intersect."""
        return (
            self.x_min < other.x_max
            and other.x_min < self.x_max
            and self.y_min < other.y_max
            and other.y_min < self.y_max
        )


@dataclass(frozen=True)
class ScaleDescriptor:
    """Index scaling i -> i / phi(n) + shift with phi(n) = coefficient * n^exponent (log n)^-log_power."""

    n: float
    exponent: float
    log_power: float = 0.0
    coefficient: float = 1.0
    shift: float = 0.0

    def __post_init__(self) -> None:
        if self.exponent <= 0:
            raise ValueError(f"scale exponent must be positive, got {self.exponent}")
        if self.coefficient <= 0:
            raise ValueError(f"scale coefficient must be positive, got {self.coefficient}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.log_power != 0.0 and self.n < 2:
            raise ValueError("a logarithmic correction needs n >= 2")

    @property
    def phi(self) -> float:
        value = self.coefficient * self.n**self.exponent
        if self.log_power != 0.0:
            value *= math.log(self.n) ** (-self.log_power)
        return value

    def map(self, indices: np.ndarray) -> np.ndarray:
        return np.asarray(indices, dtype=float) / self.phi + self.shift

    def index_bound(self, x: float) -> int:
        """Largest index whose scaled position is <= x."""
        return max(0, math.floor((x - self.shift) * self.phi))

    @classmethod
    def empty_bins(cls, n: float, rho: float) -> "ScaleDescriptor":
        """phi(n) = n^(1/(rho+2)), the scale of the first empty bins."""
        return cls(n, 1.0 / (rho + 2.0))

    @classmethod
    def power(cls, n: float, alpha: float, beta: float = 0.0) -> "ScaleDescriptor":
        """phi(n) = n^alpha / (log n)^beta."""
        return cls(n, alpha, log_power=beta)

    @classmethod
    def deterministic_comparison(cls, n: float, alpha_coeff: float, delta: float) -> "ScaleDescriptor":
        """i (log n)^(1 + 1/delta) / (alpha delta n)^(1/delta) - log n - ((1 + delta)/delta) log log n.

        The front of the empty bins sits where n alpha i^-delta = (log n) / delta; a
        position is log n times the relative distance to that front, minus the log log n term.
        """
        if n < 3:
            raise ValueError("the log log n shift needs n >= 3")
        log_n = math.log(n)
        return cls(
            n,
            1.0 / delta,
            log_power=1.0 + 1.0 / delta,
            coefficient=(alpha_coeff * delta) ** (1.0 / delta),
            shift=-log_n - ((1.0 + delta) / delta) * math.log(log_n),
        )


@dataclass(frozen=True)
class ScaledPointProcess:
    dimension: int
    points: np.ndarray = field(repr=False)
    """Sorted scaled indices (1-D) or an (k, 2) array of pairs (2-D)."""
    scale: ScaleDescriptor

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point coordinates must be finite")

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def count_in(self, rect: Rectangle) -> int:
        if len(self) == 0:
            return 0
        return int(np.count_nonzero(rect.contains(self.points)))


def empty_bin_process(occ: OccupancyCounts, level: int, scale: ScaleDescriptor) -> ScaledPointProcess:
    """Scaled indices of the bins holding exactly `level` balls (level 0: empty bins)."""
    if level < 0:
        raise ValueError(f"level must be non-negative, got {level}")
    indices = np.flatnonzero(occ.counts == level) + 1
    return ScaledPointProcess(1, scale.map(indices), scale)


def two_dim_process(probvec: BinProbabilityVector, n: float) -> ScaledPointProcess:
    """Pairs (i / n^(1/(rho+2)), n P_i) for i = 1..n_bins."""
    if probvec.source_tag is not SourceTag.YULE:
        raise ValueError("the two-dimensional process is defined for the Yule source")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    scale = ScaleDescriptor.empty_bins(n, probvec.rho)
    idx = np.arange(1, probvec.n_bins + 1, dtype=float)
    points = np.column_stack((scale.map(idx), n * probvec.probs))
    return ScaledPointProcess(2, points, scale)


def expected_window_counts(
    probvec: BinProbabilityVector,
    n: float,
    scale: ScaleDescriptor,
    windows: Sequence[Tuple[float, float]],
) -> np.ndarray:
    """Poissonized expectation sum_i e^{-n p_i} of the scaled empty-bin process per window."""
    positions = scale.map(np.arange(1, probvec.n_bins + 1, dtype=float))
    void = np.exp(-n * probvec.probs)
    out: List[float] = []
    for lower, upper in windows:
        if lower > upper:
            raise ValueError(f"window ({lower}, {upper}) is reversed")
        if upper > positions[-1]:
            logger.warning("window upper bound %g exceeds the truncation %g", upper, positions[-1])
        mask = (positions >= lower) & (positions <= upper)
        out.append(float(np.sum(void[mask])))
    return np.asarray(out)


def count_in_rectangles(processes: Iterable[ScaledPointProcess], rect: Rectangle) -> np.ndarray:
    """Per-replication counts of points in `rect`."""
    return np.asarray([process.count_in(rect) for process in processes], dtype=np.int64)
