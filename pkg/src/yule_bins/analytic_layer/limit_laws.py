"""Closed-form and quadrature evaluation of the limit laws of the Yule-bin model.

Most limits are mixtures over W ~ Exp(1) (the law of W_inf): given W the empty-bin process is
Poisson with intensity W^{-rho} x^{rho+1} / rho, so every functional below reduces to
E[h(c W^{-rho})] for a count functional h and a window constant c.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from scipy import special

from yule_bins.analytic_layer.quadrature import (
    DEFAULT_QUADRATURE,
    ExtendedReal,
    QuadratureSpec,
    Unbounded,
    expectation_over_exponential,
)
from yule_bins.model_layer.point_process import Rectangle

logger = logging.getLogger(__name__)


def _check_rho(rho: float) -> None:
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")


def _scalar_or_array(values: np.ndarray, like: object) -> float | np.ndarray:
    return float(values) if np.ndim(like) == 0 else values


# ----------------------------------------------------------------------------
# Split times and the martingale limit
# ----------------------------------------------------------------------------


def tn_cdf(n: int, x: float | np.ndarray) -> float | np.ndarray:
    """P(t_n <= x) = (1 - e^{-x})^n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    arr = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        values = np.where(arr > 0, np.exp(n * np.log(-np.expm1(-np.maximum(arr, 0.0)))), 0.0)
    return _scalar_or_array(values, x)


def gumbel_cdf(x: float | np.ndarray) -> float | np.ndarray:
    """exp(-e^{-x}), the law of M_inf."""
    arr = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        values = np.exp(-np.exp(-arr))
    return _scalar_or_array(values, x)


def z_cdf(x: float | np.ndarray, i: int, rho: float) -> float | np.ndarray:
    """P(Z_i <= x) = 1 - (1 - x/i)^{i/rho} on [0, i)."""
    _check_rho(rho)
    arr = np.asarray(x, dtype=float)
    inside = np.clip(arr / i, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        values = -np.expm1((i / rho) * np.log1p(-inside))
    values = np.where(arr >= i, 1.0, np.where(arr <= 0, 0.0, values))
    return _scalar_or_array(values, x)


def condition_c_constant(i: int, rho: float, grid_size: int = 2000) -> float:
    """sup over x in (0, 1/2] of |P(Z_i <= x) - x/rho| / x^2, on a geometric grid."""
    x = np.geomspace(1e-3, 0.5, grid_size)
    return float(np.max(np.abs(z_cdf(x, i, rho) - x / rho) / x**2))


def ineq1_probability(x: float, y: float) -> float:
    """Exact P((1 - e^{-yE}) / y <= x) for E ~ Exp(1), 0 < y <= 1."""
    if not 0 < y <= 1:
        raise ValueError(f"y must lie in (0, 1], got {y}")
    if x <= 0:
        return 0.0
    if x * y >= 1:
        return 1.0
    return float(-math.expm1(math.log1p(-x * y) / y))


def ineq1_bound(x: float) -> float:
    """e (1 - e^{-x})."""
    return float(-math.e * math.expm1(-x))


# ----------------------------------------------------------------------------
# Mixed Poisson limits of the empty-bin process
# ----------------------------------------------------------------------------


def window_constant(x: float, rho: float) -> float:
    """x^{rho+2} / (rho (rho+2)): conditional mean of the points in [0, x] per unit W^{-rho}."""
    return x ** (rho + 2) / (rho * (rho + 2))


def power_measure(rect: Rectangle, rho: float) -> float:
    """Integral of x^{rho+1} dx dy over the rectangle."""
    if math.isinf(rect.y_max):
        raise ValueError("rectangle must be bounded in y")
    width = rect.y_max - rect.y_min
    return width * (rect.x_max ** (rho + 2) - rect.x_min ** (rho + 2)) / (rho + 2)


def _inv_pow(w: float, rho: float) -> float:
    """w^{-rho}, saturating at inf instead of raising OverflowError."""
    log_value = -rho * math.log(w)
    return math.inf if log_value > 700 else math.exp(log_value)


def _mixed_void(coeff: float, rho: float, quad: QuadratureSpec) -> float:
    """E exp(-coeff W^{-rho})."""
    if coeff == 0:
        return 1.0

    def g(w: float) -> float:
        return math.exp(-coeff * _inv_pow(w, rho)) if w > 0 else 0.0

    return expectation_over_exponential(g, quad).value


def nu_survival_limit(x: float, rho: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Limit of P(nu_n / n^{1/(rho+2)} >= x), nu_n the first empty bin."""
    _check_rho(rho)
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    return _mixed_void(window_constant(x, rho), rho, quad)


def mean_count_limit(x: float, rho: float) -> ExtendedReal:
    """x^{rho+2} Gamma(1 - rho) / (rho (rho+2)); diverges for rho >= 1."""
    _check_rho(rho)
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    if x == 0:
        return 0.0
    if rho >= 1:
        return Unbounded.POSITIVE
    return window_constant(x, rho) * float(special.gamma(1 - rho))


def mixed_poisson_count_pmf(
    j: int, x: float, rho: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """P(j empty-bin points in [0, x]) under the mixed Poisson limit."""
    _check_rho(rho)
    if j < 0:
        raise ValueError(f"j must be non-negative, got {j}")
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    if j == 0:
        return nu_survival_limit(x, rho, quad)
    coeff = window_constant(x, rho)
    log_factorial = float(special.gammaln(j + 1))

    def g(w: float) -> float:
        if w <= 0:
            return 0.0
        lam = coeff * _inv_pow(w, rho)
        if not math.isfinite(lam):
            return 0.0
        return math.exp(special.xlogy(j, lam) - lam - log_factorial)

    peak = (coeff / j) ** (1 / rho)
    return expectation_over_exponential(g, quad, peak=peak).value


def mixed_poisson_count_sf(
    j: int, x: float, rho: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """P(at least j points in [0, x]) under the mixed Poisson limit."""
    _check_rho(rho)
    if j <= 0:
        return 1.0
    coeff = window_constant(x, rho)

    def g(w: float) -> float:
        if w <= 0:
            return 1.0
        return float(special.gammainc(j, coeff * _inv_pow(w, rho)))

    return expectation_over_exponential(g, quad, peak=(coeff / j) ** (1 / rho)).value


def mixed_poisson_mean(
    x: float, rho: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> ExtendedReal:
    """E[c W^{-rho}] by quadrature; a cross-check of mean_count_limit."""
    _check_rho(rho)
    if rho >= 1:
        return Unbounded.POSITIVE
    coeff = window_constant(x, rho)
    return coeff * expectation_over_exponential(lambda w: w ** (-rho) if w > 0 else 0.0, quad).value


def mixed_poisson_dispersion_limit(x: float, rho: float) -> ExtendedReal:
    """Var/mean of the limit count in [0, x]; finite only for rho < 1/2."""
    _check_rho(rho)
    if rho >= 0.5:
        return Unbounded.POSITIVE
    coeff = window_constant(x, rho)
    g1, g2 = float(special.gamma(1 - rho)), float(special.gamma(1 - 2 * rho))
    return 1.0 + coeff * (g2 - g1**2) / g1


# ----------------------------------------------------------------------------
# Two-dimensional process
# ----------------------------------------------------------------------------


def laplace_functional_limit(
    rect: Rectangle, theta: float, rho: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """E exp(-N(theta 1_rect)) for the limit of the (i/n^{1/(rho+2)}, n P_i) process."""
    return laplace_functional_steps([(rect, theta)], rho, quad)


def laplace_functional_steps(
    steps: Sequence[Tuple[Rectangle, float]],
    rho: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Laplace functional of f = sum_k theta_k 1_{R_k} over disjoint rectangles R_k."""
    _check_rho(rho)
    for pos, (rect, theta) in enumerate(steps):
        if theta < 0:
            raise ValueError(f"theta must be non-negative, got {theta}")
        for other, _ in steps[pos + 1 :]:
            if rect.overlaps(other):
                raise ValueError("step rectangles must be disjoint")
    coeff = 0.0
    for rect, theta in steps:
        weight = 1.0 if math.isinf(theta) else -math.expm1(-theta)
        coeff += weight * power_measure(rect, rho) / rho
    return _mixed_void(coeff, rho, quad)


def two_dim_rectangle_mean(rect: Rectangle, rho: float) -> ExtendedReal:
    """Limit mean count of the two-dimensional process in `rect`: (measure / rho) Gamma(1 - rho)."""
    _check_rho(rho)
    measure = power_measure(rect, rho)
    if measure == 0:
        return 0.0
    if rho >= 1:
        return Unbounded.POSITIVE
    return measure / rho * float(special.gamma(1 - rho))


# ----------------------------------------------------------------------------
# Deterministic power law and the rare-event factor
# ----------------------------------------------------------------------------


def det_limit_intensity(window: Tuple[float, float], alpha_coeff: float, delta: float) -> float:
    """Integral of (alpha delta)^{1/delta} e^x over the window."""
    if delta <= 1:
        raise ValueError(f"delta must exceed 1, got {delta}")
    if alpha_coeff <= 0:
        raise ValueError(f"alpha_coeff must be positive, got {alpha_coeff}")
    lower, upper = window
    if not (math.isfinite(lower) and math.isfinite(upper)) or lower > upper:
        raise ValueError(f"window must be a bounded interval, got {window}")
    return (alpha_coeff * delta) ** (1 / delta) * (math.exp(upper) - math.exp(lower))


def _floor_rho(rho: float) -> int:
    if rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    return int(math.floor(rho))


def expected_inv_d_rho(rho: float) -> float:
    """E(1/D_rho) = Gamma(floor(rho) + 1 - rho) / Gamma(floor(rho) + 1)."""
    k = _floor_rho(rho)
    return float(special.gamma(k + 1 - rho) / special.gamma(k + 1))


def expected_inv_d_finite(rho: float, i: int) -> float:
    """E(1/D_i) = i^{-rho} prod_{j=k+1}^{i} (1 - rho/j)^{-1} with k = floor(rho)."""
    k = _floor_rho(rho)
    if i < k:
        raise ValueError(f"i must be >= floor(rho)={k}, got {i}")
    j = np.arange(k + 1, i + 1, dtype=float)
    return float(math.exp(-rho * math.log(i) - np.sum(np.log1p(-rho / j))))


def d_rho_cdf(x: float | np.ndarray, rho: float) -> float | np.ndarray:
    """P(D_rho <= x) with D_rho = G^rho, G ~ Gamma(floor(rho) + 1, 1)."""
    k = _floor_rho(rho)
    arr = np.asarray(x, dtype=float)
    values = special.gammainc(k + 1, np.power(np.maximum(arr, 0.0), 1 / rho))
    return _scalar_or_array(values, x)


# ----------------------------------------------------------------------------
# Handles
# ----------------------------------------------------------------------------


class LawId(str, Enum):
    TN_CDF = "tn_cdf"
    GUMBEL = "gumbel"
    NU_SURVIVAL = "nu_survival"
    MIXED_POISSON_PMF = "mixed_poisson_pmf"
    MEAN_COUNT = "mean_count"
    LAPLACE_RECTANGLE = "laplace_rectangle"
    DET_INTENSITY = "det_intensity"
    Z_CDF = "z_cdf"
    D_RHO_CDF = "d_rho_cdf"


# parameters each law needs; the call argument supplies the remaining variable
REQUIRED_PARAMETERS: Dict[LawId, Tuple[str, ...]] = {
    LawId.TN_CDF: ("n",),
    LawId.GUMBEL: (),
    LawId.NU_SURVIVAL: ("rho",),
    LawId.MIXED_POISSON_PMF: ("x", "rho"),
    LawId.MEAN_COUNT: ("rho",),
    LawId.LAPLACE_RECTANGLE: ("a", "b", "rho"),
    LawId.DET_INTENSITY: ("lower", "alpha_coeff", "delta"),
    LawId.Z_CDF: ("i", "rho"),
    LawId.D_RHO_CDF: ("rho",),
}


@dataclass(frozen=True)
class LimitLawHandle:
    """A limit law with its parameters bound; calling it evaluates the law at one argument.

    The argument is x for CDFs and survival functions, j for the pmf, theta for the
    rectangle Laplace functional and the window's upper end for the deterministic intensity.
    """

    law_id: LawId
    parameters: Dict[str, float] = field(default_factory=dict)
    quad: QuadratureSpec = DEFAULT_QUADRATURE

    def __post_init__(self) -> None:
        object.__setattr__(self, "law_id", LawId(self.law_id))
        missing = [p for p in REQUIRED_PARAMETERS[self.law_id] if p not in self.parameters]
        if missing:
            raise ValueError(f"law {self.law_id.value} is missing parameters {missing}")

    def _evaluator(self) -> Callable[[float], object]:
        p = self.parameters
        law = self.law_id
        if law is LawId.TN_CDF:
            return lambda v: tn_cdf(int(p["n"]), v)
        if law is LawId.GUMBEL:
            return gumbel_cdf
        if law is LawId.NU_SURVIVAL:
            return lambda v: nu_survival_limit(v, p["rho"], self.quad)
        if law is LawId.MIXED_POISSON_PMF:
            return lambda v: mixed_poisson_count_pmf(int(v), p["x"], p["rho"], self.quad)
        if law is LawId.MEAN_COUNT:
            return lambda v: mean_count_limit(v, p["rho"])
        if law is LawId.LAPLACE_RECTANGLE:
            return lambda v: laplace_functional_limit(
                Rectangle(p["a"], p["b"]), v, p["rho"], self.quad
            )
        if law is LawId.DET_INTENSITY:
            return lambda v: det_limit_intensity((p["lower"], v), p["alpha_coeff"], p["delta"])
        if law is LawId.Z_CDF:
            return lambda v: z_cdf(v, int(p["i"]), p["rho"])
        return lambda v: d_rho_cdf(v, p["rho"])

    def __call__(self, value):
        evaluate = self._evaluator()
        if self.law_id in (LawId.TN_CDF, LawId.GUMBEL, LawId.Z_CDF, LawId.D_RHO_CDF):
            return evaluate(value)
        if np.ndim(value) == 0:
            return evaluate(value)
        return np.asarray([evaluate(v) for v in np.asarray(value, dtype=float)])

    def describe(self) -> Dict[str, object]:
        return {"law_id": self.law_id.value, "parameters": dict(self.parameters)}
