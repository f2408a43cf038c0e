"""Adaptive quadrature settings and helpers shared by the analytic layer."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Union

from scipy import integrate

from yule_bins.model_layer.constants import (
    DEFAULT_QUAD_ABSTOL,
    DEFAULT_QUAD_RTOL,
    DEFAULT_QUAD_SUBDIVISIONS,
    MAX_QUAD_RTOL,
)

logger = logging.getLogger(__name__)


class Unbounded(str, Enum):
    """Extended-real markers returned where a limit diverges."""

    POSITIVE = "+inf"
    NEGATIVE = "-inf"


ExtendedReal = Union[float, Unbounded]


def is_unbounded(value: object) -> bool:
    return isinstance(value, Unbounded)


class Transform(str, Enum):
    NONE = "none"
    EXP_SUBSTITUTION = "exp-substitution"


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = DEFAULT_QUAD_RTOL
    """Target relative error of each adaptive integration."""
    max_subdivisions: int = DEFAULT_QUAD_SUBDIVISIONS
    """Upper bound on subintervals (scipy's `limit`)."""
    transform: Transform = Transform.EXP_SUBSTITUTION
    """Treatment of integrals over w in (0, inf) against e^{-w} dw."""
    absolute_tolerance: float = DEFAULT_QUAD_ABSTOL
    """Absolute error floor, used where the integral is close to zero."""

    def __post_init__(self) -> None:
        if not 0 < self.relative_tolerance <= MAX_QUAD_RTOL:
            raise ValueError(
                f"relative_tolerance must lie in (0, {MAX_QUAD_RTOL}], got {self.relative_tolerance}"
            )
        if self.max_subdivisions < 1:
            raise ValueError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")
        object.__setattr__(self, "transform", Transform(self.transform))

    def refined(self, factor: float = 0.5) -> "QuadratureSpec":
        """Same settings with the relative tolerance scaled by `factor`."""
        return replace(self, relative_tolerance=self.relative_tolerance * factor)

    def nested_allowance(self, value: float) -> float:
        """Error carried into an outer integral by inner integrals that meet these tolerances."""
        return self.relative_tolerance * abs(value) + self.absolute_tolerance


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error: float


class QuadratureError(RuntimeError):
    """The adaptive rule did not reach the requested tolerance."""

    def __init__(self, message: str, value: float, abs_error: float):
        super().__init__(f"{message} (value={value:.12g}, abs_error={abs_error:.3g})")
        self.value = value
        self.abs_error = abs_error


def integrate_1d(
    func: Callable[[float], float],
    lower: float,
    upper: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    points: Optional[list] = None,
) -> QuadratureResult:
    """scipy `quad` under `quad` tolerances with an explicit convergence verdict.

    A solver warning is tolerated when the reported error still lies within ten times the
    requested tolerance; otherwise QuadratureError carries the achieved estimate.
    """
    kwargs = dict(
        epsabs=quad.absolute_tolerance,
        epsrel=quad.relative_tolerance,
        limit=quad.max_subdivisions,
        full_output=1,
    )
    if points is not None and math.isfinite(lower) and math.isfinite(upper):
        kwargs["points"] = [p for p in points if lower < p < upper] or None
    value, abs_error, _info, *message = integrate.quad(func, lower, upper, **kwargs)
    target = max(quad.absolute_tolerance, quad.relative_tolerance * abs(value))
    if message:
        if abs_error > 10 * target:
            raise QuadratureError(str(message[0]).splitlines()[0], value, abs_error)
        logger.warning("quadrature warning tolerated: %s", str(message[0]).splitlines()[0])
    return QuadratureResult(float(value), float(abs_error))


def expectation_over_exponential(
    g: Callable[[float], float],
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    peak: Optional[float] = None,
) -> QuadratureResult:
    """E[g(W)] for W ~ Exp(1).

    With the exp-substitution w = -log u the range becomes u in (0, 1) and the weight e^{-w}
    disappears. `peak` marks a location in w where g varies sharply; it becomes a breakpoint.
    """
    if quad.transform is Transform.EXP_SUBSTITUTION:
        points = None if peak is None else [math.exp(-peak)]
        return integrate_1d(lambda u: g(-math.log(u)), 0.0, 1.0, quad, points=points)

    def weighted(w: float) -> float:
        return g(w) * math.exp(-w)

    if peak is None or peak <= 0:
        return integrate_1d(weighted, 0.0, math.inf, quad)
    head = integrate_1d(weighted, 0.0, peak, quad)
    tail = integrate_1d(weighted, peak, math.inf, quad)
    return QuadratureResult(head.value + tail.value, head.abs_error + tail.abs_error)
