"""Replicated samples and estimates with confidence intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class ReplicatedSamples:
    """One scalar per replication plus the seed provenance it was drawn under."""

    values: np.ndarray = field(repr=False)
    seeds: Dict[str, int] = field(default_factory=dict)
    """Provenance record, e.g. {"master_seed": 7, "first_stream": 0}."""

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("replicated samples must be non-empty")
        if not np.all(np.isfinite(values)):
            raise ValueError("replicated samples must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def seed(self) -> int:
        return int(self.seeds.get("master_seed", 0))


@dataclass(frozen=True)
class EstimateWithCI:
    """A Monte Carlo or quadrature estimate with its uncertainty."""

    value: float
    stderr: float
    n_replications: int
    seed: int = 0
    method: str = "mc"

    def __post_init__(self) -> None:
        if self.stderr < 0 or math.isnan(self.stderr):
            raise ValueError(f"stderr must be non-negative, got {self.stderr}")
        if self.n_replications < 1:
            raise ValueError(f"n_replications must be >= 1, got {self.n_replications}")

    def confidence_interval(self, z: float = 1.96) -> Tuple[float, float]:
        return self.value - z * self.stderr, self.value + z * self.stderr

    def z_score(self, reference: float) -> float:
        """(value - reference) / stderr; infinite when stderr is zero and the values differ."""
        gap = self.value - reference
        if self.stderr == 0:
            return 0.0 if gap == 0 else math.copysign(math.inf, gap)
        return gap / self.stderr

    def within(self, reference: float, n_sigma: float) -> bool:
        return abs(self.z_score(reference)) <= n_sigma


def mean_estimate(values: Sequence[float], seed: int = 0, method: str = "mc") -> EstimateWithCI:
    """Sample mean with stderr s / sqrt(n)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot estimate the mean of an empty sample")
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return EstimateWithCI(float(arr.mean()), stderr, int(arr.size), seed, method)


def ratio_estimate(
    numerators: Sequence[float],
    denominators: Sequence[float],
    seed: int = 0,
    method: str = "mc-ratio",
) -> EstimateWithCI:
    """sum(x) / sum(y) over paired replications with a delta-method standard error."""
    x = np.asarray(numerators, dtype=float)
    y = np.asarray(denominators, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("ratio estimate needs at least two paired replications")
    y_bar = y.mean()
    if y_bar == 0:
        raise ValueError("ratio estimate has a zero mean denominator")
    ratio = x.mean() / y_bar
    residual = x - ratio * y
    stderr = float(residual.std(ddof=1) / (abs(y_bar) * math.sqrt(x.size)))
    return EstimateWithCI(float(ratio), stderr, int(x.size), seed, method)


def binomial_estimate(
    successes: int, n: int, seed: int = 0, method: str = "mc-binomial"
) -> EstimateWithCI:
    """Proportion successes / n with stderr sqrt(p (1 - p) / n)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= successes <= n:
        raise ValueError(f"successes must lie in [0, {n}], got {successes}")
    p = successes / n
    return EstimateWithCI(p, math.sqrt(p * (1 - p) / n), n, seed, method)
