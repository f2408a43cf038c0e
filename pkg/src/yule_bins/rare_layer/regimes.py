"""Growth regimes of the expected empty-bin count for rho >= 1.

The count of empty bins among the first x n^alpha is driven by large values of t_k, k = floor(rho).
Conditioning on t_k <= delta log n + a splits the behaviour into three cases separated by
delta0(alpha) and delta1(alpha):

* delta < delta0: the conditioned mean vanishes;
* delta0 <= delta < delta1: growth n^{(rho+2) alpha + delta (rho-1) - 1};
* delta >= delta1: the unconditioned growth n^{((2 rho+1) alpha - 1)/rho}.

All prefactors below use the representation P_i ~ e^{-rho t_k} D_rho Z / i^{rho+1} where Z, the
limit of i (1 - e^{-rho E_i / i}), is exponential with mean rho.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import sympy
from scipy import special

from yule_bins.analytic_layer.limit_laws import expected_inv_d_rho
from yule_bins.analytic_layer.quadrature import (
    DEFAULT_QUADRATURE,
    ExtendedReal,
    QuadratureSpec,
    Unbounded,
    integrate_1d,
    is_unbounded,
)

logger = logging.getLogger(__name__)

# delta within this distance of delta1 counts as the boundary case
BOUNDARY_ATOL = 1e-12


@dataclass
class RegimeSpec:
    rho: float
    """Ball-location rate, > 1 for the three-regime picture."""
    alpha: float
    """Window exponent: empty bins are counted among the first x n^alpha."""
    delta: float
    """Coefficient of log n in the conditioning t_k <= delta log n + a_shift."""
    a_shift: float = 0.0
    """Additive shift a of the conditioning threshold."""
    x: float = 1.0
    """Right end of the scaled window."""

    def __post_init__(self) -> None:
        self.check_parameters()

    def check_parameters(self) -> None:
        if self.rho < 1:
            raise ValueError(f"rho must be >= 1, got {self.rho}")
        lo, hi = 1.0 / (2.0 * self.rho + 1.0), 1.0 / (self.rho + 2.0)
        if not lo <= self.alpha < hi:
            raise ValueError(f"alpha must lie in [{lo:.6g}, {hi:.6g}), got {self.alpha}")
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if self.x <= 0:
            raise ValueError(f"x must be positive, got {self.x}")

    def thresholds(self) -> Tuple[float, float]:
        """(delta0, delta1)."""
        return regime_thresholds(self.rho, self.alpha)


@dataclass(frozen=True)
class RegimePrediction:
    exponent: ExtendedReal
    prefactor: ExtendedReal
    case: int


def regime_thresholds(rho: float, alpha: float) -> Tuple[float, float]:
    """delta0 = (1 - alpha (rho+2)) / (rho-1) and delta1 = (1 - alpha (rho+1)) / rho."""
    if rho <= 1:
        raise ValueError(f"the regime thresholds need rho > 1, got {rho}")
    return (1.0 - alpha * (rho + 2.0)) / (rho - 1.0), (1.0 - alpha * (rho + 1.0)) / rho


def case2_exponent(rho: float, alpha: float, delta: float) -> float:
    return (rho + 2.0) * alpha + delta * (rho - 1.0) - 1.0


def case3_exponent(rho: float, alpha: float) -> float:
    return ((2.0 * rho + 1.0) * alpha - 1.0) / rho


def _check_rho_gt_one(rho: float) -> int:
    if rho == 1:
        raise ValueError("rho = 1 is the critical case; use rho1_conditioned_limit")
    if rho < 1:
        raise ValueError(f"rho must exceed 1, got {rho}")
    return int(math.floor(rho))


def case3_closed_form(x: float, rho: float) -> float:
    """Full-range case-3 prefactor x^{(2rho+1)/rho} rho^{-1/rho} pi / ((2rho+1) sin(pi/rho))."""
    _check_rho_gt_one(rho)
    return (
        x ** ((2.0 * rho + 1.0) / rho)
        * rho ** (-1.0 / rho)
        * math.pi
        / ((2.0 * rho + 1.0) * math.sin(math.pi / rho))
    )


def case3_integral(
    x: float, rho: float, lower_u: float = 0.0, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """(k/rho) int_{lower_u}^inf u^{1/rho-1} E_D int_0^x y^{rho+1} / (y^{rho+1} + rho u D) dy du.

    The u-integral is done first and in closed form as an incomplete beta tail, leaving a
    double integral over D = G^rho, G ~ Gamma(k+1), and y in (0, x). `lower_u` is measured on
    the scale n^{alpha(rho+1)-1} of e^{-rho t_k}.
    """
    k = _check_rho_gt_one(rho)
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    if lower_u < 0:
        raise ValueError(f"lower_u must be non-negative, got {lower_u}")
    if math.isinf(lower_u):
        return 0.0

    m = rho + 1.0
    a, b = 1.0 - 1.0 / rho, 1.0 / rho
    log_k_factorial = math.lgamma(k + 1.0)

    def inner(g: float) -> float:
        scale = rho * g**rho * lower_u

        def integrand(y: float) -> float:
            ym = y**m
            # fraction of the u-range beyond lower_u, regularized
            return y ** (m / rho) * float(special.betainc(a, b, ym / (ym + scale)))

        return integrate_1d(integrand, 0.0, x, quad).value

    def outer(g: float) -> float:
        if g <= 0:
            return 0.0
        weight = math.exp((k - 1) * math.log(g) - g - log_k_factorial)
        return weight * inner(g)

    if lower_u == 0:
        # every tail equals the full beta integral
        body = x ** (m / rho + 1.0) / (m / rho + 1.0) / k
    else:
        body = integrate_1d(outer, 0.0, math.inf, quad).value
    return k / rho * rho ** (-1.0 / rho) * math.pi / math.sin(math.pi / rho) * body


def regime_prediction(spec: RegimeSpec, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> RegimePrediction:
    """Growth exponent and prefactor of E(N 1{t_k <= delta log n + a}) in the given regime.

    Raises:
        ValueError: For rho = 1, which has its own logarithmic scaling.
    """
    k = _check_rho_gt_one(spec.rho)
    spec.check_parameters()
    rho, alpha, delta, a, x = spec.rho, spec.alpha, spec.delta, spec.a_shift, spec.x
    delta0, delta1 = regime_thresholds(rho, alpha)
    boundary = math.isclose(delta, delta1, rel_tol=0.0, abs_tol=BOUNDARY_ATOL)

    if delta < delta0 and not boundary:
        return RegimePrediction(Unbounded.NEGATIVE, 0.0, 1)
    if delta < delta1 and not boundary:
        prefactor = (
            x ** (rho + 2.0)
            / (rho + 2.0)
            * k
            / (rho - 1.0)
            * expected_inv_d_rho(rho)
            * math.exp((rho - 1.0) * a)
            / rho
        )
        return RegimePrediction(case2_exponent(rho, alpha, delta), prefactor, 2)
    lower_u = math.exp(-rho * a) if boundary else 0.0
    return RegimePrediction(case3_exponent(rho, alpha), case3_integral(x, rho, lower_u, quad), 3)


def regime_exponents_symbolic() -> Dict[str, sympy.Expr]:
    """Simplified exponent identities at the thresholds; both entries reduce to 0."""
    rho, alpha, delta = sympy.symbols("rho alpha delta", positive=True)
    case2 = (rho + 2) * alpha + delta * (rho - 1) - 1
    case3 = ((2 * rho + 1) * alpha - 1) / rho
    delta0 = (1 - alpha * (rho + 2)) / (rho - 1)
    delta1 = (1 - alpha * (rho + 1)) / rho
    return {
        "case2_minus_case3_at_delta1": sympy.simplify(case2.subs(delta, delta1) - case3),
        "case2_at_delta0": sympy.simplify(case2.subs(delta, delta0)),
    }


def _as_float(value: float | Unbounded) -> float:
    if is_unbounded(value):
        return math.inf if value is Unbounded.POSITIVE else -math.inf
    return float(value)


def psi_ratio(
    y: float | Unbounded,
    z: float | Unbounded,
    rho: float,
    x: float = 1.0,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Share of the case-3 prefactor coming from u in [x^{rho+1} e^{-rho z}, x^{rho+1} e^{-rho y}].

    At x = 1 this is the limit share of E(N) carried by delta1 log n + y <= t_k <= delta1 log n + z.
    """
    y_val, z_val = _as_float(y), _as_float(z)
    if not y_val < z_val:
        raise ValueError(f"psi needs y < z, got ({y}, {z})")
    _check_rho_gt_one(rho)
    total = case3_closed_form(x, rho)
    lower_u = 0.0 if math.isinf(z_val) else x ** (rho + 1.0) * math.exp(-rho * z_val)
    upper_u = math.inf if math.isinf(y_val) else x ** (rho + 1.0) * math.exp(-rho * y_val)
    above_lower = total if lower_u == 0 else case3_integral(x, rho, lower_u, quad)
    above_upper = case3_integral(x, rho, upper_u, quad)
    return (above_lower - above_upper) / total


def rho1_conditioned_limit(a: float, x: float) -> float:
    """Limit of E(N 1{t_1 <= a log n}) / log n at rho = 1: (min(a, 1/3) / 3) x^3 E(1/D_1)."""
    if a < 0:
        raise ValueError(f"a must be non-negative, got {a}")
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    return min(a, 1.0 / 3.0) / 3.0 * x**3 * expected_inv_d_rho(1.0)


def rho1_scaling(n: float, x: float, beta: float = 0.0) -> Tuple[int, float]:
    """Window floor(x n^{1/3} / (log n)^beta) and normaliser (log n)^{1 - 3 beta} at rho = 1."""
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    log_n = math.log(n)
    return math.floor(x * n ** (1.0 / 3.0) / log_n**beta), log_n ** (1.0 - 3.0 * beta)
