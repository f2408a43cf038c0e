"""Goodness-of-fit tests of simulated samples against the limit laws."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from yule_bins.analytic_layer.limit_laws import LimitLawHandle
from yule_bins.model_layer.constants import (
    MAX_PMF_SUPPORT,
    MIN_CHI2_CELL_EXPECTED,
    MIN_CHI2_COUNTS,
    MIN_KS_SAMPLES,
)
from yule_bins.stats_layer.samples import ReplicatedSamples

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GofReport:
    statistic: float
    p_value: float
    n: int
    law: Optional[LimitLawHandle] = None
    seed: int = 0
    label: str = ""
    """Free-form name of the reference law when no handle is attached."""

    @property
    def law_id(self) -> str:
        return self.law.law_id.value if self.law is not None else self.label

    def rejects(self, level: float = 0.01) -> bool:
        return self.p_value < level

    def to_json(self) -> str:
        return json.dumps(
            {
                "law_id": self.law_id,
                "statistic": self.statistic,
                "p_value": self.p_value,
                "n": self.n,
                "seed": self.seed,
            },
            sort_keys=False,
        )


def ks_test(
    samples: ReplicatedSamples | Sequence[float],
    cdf: Callable,
    label: str = "",
) -> GofReport:
    """One-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.

    Raises:
        ValueError: If fewer than 50 samples are given.
    """
    if not isinstance(samples, ReplicatedSamples):
        samples = ReplicatedSamples(np.asarray(samples, dtype=float))
    if len(samples) < MIN_KS_SAMPLES:
        raise ValueError(f"ks_test needs at least {MIN_KS_SAMPLES} samples, got {len(samples)}")

    result = stats.kstest(samples.values, cdf, method="asymp")
    law = cdf if isinstance(cdf, LimitLawHandle) else None
    report = GofReport(
        float(result.statistic), float(result.pvalue), len(samples), law, samples.seed, label
    )
    logger.debug("KS %s: D=%.5f p=%.4g n=%d", report.law_id, report.statistic, report.p_value, report.n)
    return report


def merge_cells(expected: Sequence[float], minimum: float = MIN_CHI2_CELL_EXPECTED) -> List[Tuple[int, int]]:
    """Group consecutive cells so that each group's expected count reaches `minimum`.

    Cells are scanned left to right; a short remainder joins the last complete group.

    Returns:
        List of half-open index ranges (start, stop).
    """
    groups: List[Tuple[int, int]] = []
    start, running = 0, 0.0
    for pos, value in enumerate(expected):
        running += value
        if running >= minimum:
            groups.append((start, pos + 1))
            start, running = pos + 1, 0.0
    if start < len(expected):
        if groups:
            first, _ = groups.pop()
            groups.append((first, len(expected)))
        else:
            groups.append((start, len(expected)))
    return groups


def _support_probabilities(pmf: Callable[[int], float], n: int, max_count: int) -> np.ndarray:
    """pmf(0), pmf(1), ... until every observed value is covered and the tail is below a cell."""
    probs: List[float] = []
    cumulative = 0.0
    j = 0
    while j < MAX_PMF_SUPPORT:
        p = float(pmf(j))
        probs.append(p)
        cumulative += p
        j += 1
        if j > max_count and n * (1.0 - cumulative) < MIN_CHI2_CELL_EXPECTED:
            break
    return np.asarray(probs)


def count_pmf_test(
    counts: Sequence[int],
    pmf: Callable[[int], float],
    seed: int = 0,
    label: str = "",
) -> GofReport:
    """Chi-square test of integer counts against a pmf on {0, 1, ...}.

    Cells j = 0..J-1 are followed by a tail cell {>= J} whose expectation is n minus the rest.
    Adjacent cells are merged until every expected count is at least 5.

    Raises:
        ValueError: With fewer than 200 counts, or when merging leaves fewer than two cells.
    """
    obs = np.asarray(counts)
    if obs.size < MIN_CHI2_COUNTS:
        raise ValueError(f"count_pmf_test needs at least {MIN_CHI2_COUNTS} counts, got {obs.size}")
    if np.any(obs < 0):
        raise ValueError("counts must be non-negative")
    obs = obs.astype(np.int64)
    n = int(obs.size)

    probs = _support_probabilities(pmf, n, int(obs.max()))
    support = probs.size
    expected = np.append(n * probs, max(n - n * float(probs.sum()), 0.0))
    # last slot collects every count >= support
    observed = np.bincount(np.minimum(obs, support), minlength=support + 1)

    groups = merge_cells(expected)
    if len(groups) < 2:
        raise ValueError("degenerate cell structure: fewer than two cells after merging")
    f_exp = np.asarray([expected[a:b].sum() for a, b in groups])
    f_obs = np.asarray([observed[a:b].sum() for a, b in groups], dtype=float)
    f_exp *= n / f_exp.sum()

    result = stats.chisquare(f_obs, f_exp)
    law = pmf if isinstance(pmf, LimitLawHandle) else None
    logger.debug("chi2 over %d cells: stat=%.4g p=%.4g", len(groups), result.statistic, result.pvalue)
    return GofReport(float(result.statistic), float(result.pvalue), n, law, seed, label)
