"""Bin probability vectors: the random Yule environment and the deterministic power law."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import zeta

from yule_bins.model_layer.constants import DECOMPOSITION_RTOL, NORMALIZATION_ATOL
from yule_bins.model_layer.splits import SplitSequence

logger = logging.getLogger(__name__)


class SourceTag(str, Enum):
    YULE = "yule"
    DETERMINISTIC_POWER_LAW = "deterministic-power-law"


@dataclass(frozen=True)
class BinProbabilityVector:
    """Probabilities of the first bins plus the mass beyond them.

    For the Yule source, `edges` keeps the split times so that exact ball placement can search
    the partition directly.
    """

    rho: float
    """Rate of the exponential ball locations; mirrors `delta` for the deterministic source."""
    probs: np.ndarray = field(repr=False)
    """P_i for i = 1..n_bins."""
    tail_mass: float
    """Probability that a ball lands beyond bin n_bins."""
    w_values: np.ndarray = field(repr=False)
    """W_i; empty for the deterministic source."""
    z_values: np.ndarray = field(repr=False)
    """Z_i = i (1 - e^{-rho E_i / i}); empty for the deterministic source."""
    source_tag: SourceTag
    edges: np.ndarray | None = field(default=None, repr=False)
    """Split times t_1..t_n of the Yule source."""
    delta: float | None = None
    """Power-law exponent of the deterministic source."""
    power_coeff: float | None = None
    """Normalised power-law coefficient, Q_i = power_coeff / i^delta."""

    @property
    def n_bins(self) -> int:
        return int(self.probs.size)

    def normalization_error(self) -> float:
        """|sum(probs) + tail_mass - 1|."""
        return abs(float(np.sum(self.probs)) + self.tail_mass - 1.0)

    def decomposition_error(self) -> float:
        """Largest relative gap between P_i and W_i^rho Z_i / i^(rho+1)."""
        if self.source_tag is not SourceTag.YULE:
            raise ValueError("the W/Z decomposition exists only for the Yule source")
        idx = np.arange(1, self.n_bins + 1, dtype=float)
        product = np.power(self.w_values, self.rho) * self.z_values / np.power(idx, self.rho + 1)
        return float(np.max(np.abs(product - self.probs) / self.probs))

    def check_invariants(self) -> bool:
        if self.normalization_error() > NORMALIZATION_ATOL:
            return False
        if self.source_tag is SourceTag.YULE:
            return self.decomposition_error() <= DECOMPOSITION_RTOL
        return True


def bin_probabilities(splits: SplitSequence, rho: float) -> BinProbabilityVector:
    """P_i = e^{-rho t_{i-1}} (1 - e^{-rho (t_i - t_{i-1})}) and tail e^{-rho t_n}.

    Step lengths are read back from the stored times, so the telescoping sum closes on the
    same floating-point partition that exact ball placement searches.

    Raises:
        ValueError: If rho <= 0.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    previous = splits.previous_times
    steps = np.diff(splits.times, prepend=0.0)
    jump = -np.expm1(-rho * steps)
    probs = np.exp(-rho * previous) * jump
    idx = splits.indices
    return BinProbabilityVector(
        rho=float(rho),
        probs=probs,
        tail_mass=float(np.exp(-rho * splits.times[-1])),
        w_values=idx * np.exp(-previous),
        z_values=idx * jump,
        source_tag=SourceTag.YULE,
        edges=splits.times,
    )


def deterministic_power_law(alpha_coeff: float, delta: float, n_bins: int) -> BinProbabilityVector:
    """Q_i proportional to alpha_coeff / i^delta, normalised over the whole sequence.

    The tail beyond n_bins is the Hurwitz zeta value zeta(delta, n_bins + 1) over zeta(delta);
    alpha_coeff cancels in the normalisation.

    Raises:
        ValueError: If delta <= 1, alpha_coeff <= 0 or n_bins < 1.
    """
    if delta <= 1:
        raise ValueError(f"delta must exceed 1 for a summable power law, got {delta}")
    if alpha_coeff <= 0:
        raise ValueError(f"alpha_coeff must be positive, got {alpha_coeff}")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")

    total = float(zeta(delta))
    idx = np.arange(1, n_bins + 1, dtype=float)
    probs = np.power(idx, -delta) / total
    tail = float(zeta(delta, n_bins + 1.0)) / total
    logger.debug("power law delta=%g: zeta=%.15g tail=%.6g", delta, total, tail)
    return BinProbabilityVector(
        rho=float(delta),
        probs=probs,
        tail_mass=tail,
        w_values=np.empty(0),
        z_values=np.empty(0),
        source_tag=SourceTag.DETERMINISTIC_POWER_LAW,
        delta=float(delta),
        power_coeff=1.0 / total,
    )
