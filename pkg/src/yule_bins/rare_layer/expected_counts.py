"""Expected empty-bin counts sum_i E(e^{-n P_i}) for rho >= 1.

Two routes compute the same sums:

* quadrature over the asymptotic representation P_i ~ e^{-rho t_k} D_rho Z / (i (i-1)^rho),
  k = floor(rho), t_k with its exact law, D_rho = G^rho with G ~ Gamma(k+1) and Z exponential
  with mean rho integrated out in closed form;
* an mc-oracle that samples split sequences and evaluates e^{-n P_i} on the exact P_i.

`exact_exp_sum` adds a third, deterministic reference valid for every rho > 0: quadrature over
the exact finite-i law of P_i.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy import special

from yule_bins.analytic_layer.quadrature import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    expectation_over_exponential,
    integrate_1d,
)
from yule_bins.model_layer.rng import RngStream, as_generator
from yule_bins.model_layer.splits import sample_t_k_conditional, split_window_mass

logger = logging.getLogger(__name__)

MC_CHUNK_ROWS = 10_000
DEFAULT_MC_REPLICATIONS = 10_000
TAIL_PAD = 40.0  # e^{-40}: t-range cut-off of the exact-law integrals


class Method(str, Enum):
    QUADRATURE = "quadrature"
    MC_ORACLE = "mc-oracle"
    EXACT = "exact-quadrature"


@dataclass(frozen=True)
class ExpectedCountResult:
    value: float
    method: Method
    error_estimate: float
    n: float


class MethodDisagreementError(RuntimeError):
    """Quadrature and mc-oracle sums differ beyond the combined tolerance."""

    def __init__(self, quadrature: ExpectedCountResult, oracle: ExpectedCountResult, tolerance: float):
        super().__init__(
            f"quadrature {quadrature.value:.8g} vs mc-oracle {oracle.value:.8g} "
            f"(+/- {oracle.error_estimate:.3g}) exceeds tolerance {tolerance:.3g}"
        )
        self.quadrature = quadrature
        self.oracle = oracle


def _floor_rho(rho: float) -> int:
    if rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    return int(math.floor(rho))


def _index_range(rho: float, k_max: int, k_min: Optional[int]) -> np.ndarray:
    first = _floor_rho(rho) + 1
    if k_min is not None:
        first = max(first, k_min)
    return np.arange(first, k_max + 1, dtype=float)


def _log_split_density(t: float, k: int) -> float:
    """log of k e^{-t} (1 - e^{-t})^{k-1}, the density of t_k."""
    return math.log(k) - t + float(special.xlog1py(k - 1, -math.exp(-t)))


# ----------------------------------------------------------------------------
# Quadrature over the asymptotic representation
# ----------------------------------------------------------------------------


def _representation_sum(
    n: float,
    idx: np.ndarray,
    rho: float,
    window: Tuple[float, float],
    quad: QuadratureSpec,
    printed_exponent: bool,
) -> Tuple[float, float]:
    """Integral over t_k in `window` of sum_i E_G[1 / (1 + coeff_i e^{-r t} G^rho)]."""
    k = _floor_rho(rho)
    if printed_exponent:
        # as printed: e^{-t_k} D_rho E / i^{rho+1} with E a unit exponential
        coeff = n / idx ** (rho + 1.0)
        rate = 1.0
    else:
        coeff = rho * n / (idx * (idx - 1.0) ** rho)
        rate = rho
    log_k_factorial = math.lgamma(k + 1.0)

    def over_gamma(t: float) -> float:
        a = coeff * math.exp(-rate * t)

        def integrand(g: float) -> float:
            if g <= 0:
                return 0.0
            density = math.exp(k * math.log(g) - g - log_k_factorial)
            return density * float(np.sum(1.0 / (1.0 + a * g**rho)))

        return integrate_1d(integrand, 0.0, math.inf, quad).value

    def integrand_t(t: float) -> float:
        return math.exp(_log_split_density(t, k)) * over_gamma(t) if t > 0 else 0.0

    lower, upper = window
    # over_gamma drops from idx.size to 0 around these t
    marks = sorted({float(np.log(c) / rate) for c in (coeff.min(), coeff.max())})
    if math.isinf(upper):
        cut = max(lower, marks[-1]) + TAIL_PAD / rate
        head = integrate_1d(integrand_t, lower, cut, quad, points=marks)
        tail = integrate_1d(integrand_t, cut, math.inf, quad)
        value = head.value + tail.value
        return value, head.abs_error + tail.abs_error + quad.nested_allowance(value)
    result = integrate_1d(integrand_t, lower, upper, quad, points=marks)
    return result.value, result.abs_error + quad.nested_allowance(result.value)


def _oracle_sum(
    n: float,
    idx: np.ndarray,
    rho: float,
    window: Tuple[float, float],
    replications: int,
    rng: RngStream | np.random.Generator,
) -> Tuple[float, float]:
    """Mean and stderr of sum_i e^{-n P_i} 1{t_k in window} over sampled split sequences.

    t_k is drawn from its law conditioned on the window and the result is weighted by the
    window's mass; later increments are unconditioned.
    """
    k = _floor_rho(rho)
    k_max = int(idx[-1])
    first = int(idx[0])
    gen = as_generator(rng)
    mass = split_window_mass(k, window)
    full_window = window[0] == 0.0 and math.isinf(window[1])
    j = np.arange(k + 1, k_max + 1, dtype=float)

    sums: List[np.ndarray] = []
    remaining = replications
    while remaining > 0:
        rows = min(MC_CHUNK_ROWS, remaining)
        remaining -= rows
        if full_window:
            head = gen.standard_exponential((rows, k)) / np.arange(1, k + 1, dtype=float)
            t_k = head.sum(axis=1)
        else:
            t_k = sample_t_k_conditional(k, window, gen, size=rows)
        increments = gen.standard_exponential((rows, j.size))
        steps = increments / j
        times = t_k[:, None] + np.cumsum(steps, axis=1)
        previous = times - steps  # t_{i-1} for i = k+1..k_max
        probs = np.exp(-rho * previous) * -np.expm1(-rho * steps)
        block = np.exp(-n * probs[:, first - k - 1 :])
        sums.append(block.sum(axis=1))

    values = mass * np.concatenate(sums)
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return float(values.mean()), stderr


def expected_exp_sum(
    n: float,
    k_max: int,
    rho: float,
    method: Method | str = Method.QUADRATURE,
    *,
    k_min: Optional[int] = None,
    replications: int = DEFAULT_MC_REPLICATIONS,
    rng: RngStream | np.random.Generator | None = None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    printed_exponent: bool = False,
) -> ExpectedCountResult:
    """sum_{i=max(k+1, k_min)}^{k_max} E(e^{-n P_i}) with k = floor(rho).

    An empty index range gives 0. `printed_exponent` switches the quadrature to e^{-t_k} D_rho E
    with a unit exponential E, the literal form that the mc-oracle rejects for rho > 1.
    """
    return conditioned_exp_sum(
        n,
        k_max,
        rho,
        math.inf,
        method=method,
        k_min=k_min,
        replications=replications,
        rng=rng,
        quad=quad,
        printed_exponent=printed_exponent,
    )


def conditioned_exp_sum(
    n: float,
    k_max: int,
    rho: float,
    b: float,
    lower: float = 0.0,
    *,
    method: Method | str = Method.QUADRATURE,
    k_min: Optional[int] = None,
    replications: int = DEFAULT_MC_REPLICATIONS,
    rng: RngStream | np.random.Generator | None = None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    printed_exponent: bool = False,
) -> ExpectedCountResult:
    """sum_i E(e^{-n P_i} 1{lower <= t_k <= b}).

    Raises:
        ValueError: On rho < 1, n < 1 or a reversed window.
    """
    method = Method(method)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if b <= lower:
        if b == lower == 0.0:
            return ExpectedCountResult(0.0, method, 0.0, n)
        raise ValueError(f"window must satisfy lower < b, got ({lower}, {b})")
    if lower < 0:
        raise ValueError(f"lower must be non-negative, got {lower}")
    idx = _index_range(rho, k_max, k_min)
    if idx.size == 0:
        return ExpectedCountResult(0.0, method, 0.0, n)

    if method is Method.QUADRATURE:
        value, error = _representation_sum(n, idx, rho, (lower, b), quad, printed_exponent)
    elif method is Method.MC_ORACLE:
        if rng is None:
            raise ValueError("the mc-oracle needs an rng")
        value, error = _oracle_sum(n, idx, rho, (lower, b), replications, rng)
    else:
        if lower != 0.0 or not math.isinf(b):
            raise ValueError("the exact-law quadrature is unconditioned")
        return exact_exp_sum(n, k_max, rho, k_min=int(idx[0]), quad=quad)
    logger.debug(
        "%s sum n=%.3g i=%d..%d window=(%g, %g): %.10g +/- %.3g",
        method.value, n, int(idx[0]), int(idx[-1]), lower, b, value, error,
    )
    return ExpectedCountResult(value, method, error, n)


def cross_validate_exp_sum(
    n: float,
    k_max: int,
    rho: float,
    rng: RngStream | np.random.Generator,
    *,
    k_min: Optional[int] = None,
    replications: int = DEFAULT_MC_REPLICATIONS,
    rel_tolerance: float = 0.02,
    n_sigma: float = 3.0,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    printed_exponent: bool = False,
) -> Tuple[ExpectedCountResult, ExpectedCountResult]:
    """Quadrature and mc-oracle sums, checked against each other.

    Raises:
        MethodDisagreementError: If |quad - mc| > rel_tolerance |mc| + n_sigma stderr(mc).
    """
    quadrature = expected_exp_sum(
        n, k_max, rho, Method.QUADRATURE, k_min=k_min, quad=quad, printed_exponent=printed_exponent
    )
    oracle = expected_exp_sum(
        n, k_max, rho, Method.MC_ORACLE, k_min=k_min, replications=replications, rng=rng
    )
    tolerance = rel_tolerance * abs(oracle.value) + n_sigma * oracle.error_estimate
    if abs(quadrature.value - oracle.value) > tolerance:
        raise MethodDisagreementError(quadrature, oracle, tolerance)
    return quadrature, oracle


# ----------------------------------------------------------------------------
# Exact finite-i law
# ----------------------------------------------------------------------------


def exact_exp_sum(
    n: float,
    k_max: int,
    rho: float,
    *,
    k_min: int = 1,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> ExpectedCountResult:
    """sum_{i=k_min}^{k_max} E exp(-n e^{-rho t_{i-1}} (1 - e^{-rho E_i / i})), exactly.

    Outer expectation over E_i ~ Exp(1), inner integral over the law of t_{i-1}; t_0 = 0.
    Valid for every rho > 0.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if k_min < 1:
        raise ValueError(f"k_min must be >= 1, got {k_min}")
    idx = np.arange(k_min, k_max + 1, dtype=float)
    if idx.size == 0:
        return ExpectedCountResult(0.0, Method.EXACT, 0.0, n)

    has_first = idx[0] == 1.0
    rest = idx[1:] if has_first else idx
    order = rest - 1.0  # t_{i-1} is the split time of index i-1 >= 1
    log_order = np.log(order) if order.size else order
    marks_base = sorted({float(v) for v in np.log(order)}) if order.size else []
    if len(marks_base) > 20:
        marks_base = [marks_base[p] for p in np.linspace(0, len(marks_base) - 1, 20).astype(int)]

    def inner(e: float) -> float:
        total = math.exp(-n * -math.expm1(-rho * e)) if has_first else 0.0
        if order.size == 0:
            return total
        jump = -np.expm1(-rho * e / rest)

        def integrand(t: float) -> float:
            if t <= 0:
                return 0.0
            log_density = log_order - t + special.xlog1py(order - 1.0, -math.exp(-t))
            return float(np.sum(np.exp(log_density - n * math.exp(-rho * t) * jump)))

        transition = math.log(max(n * float(jump.max()), 1.0)) / rho
        cut = max(float(log_order.max()), transition) + TAIL_PAD
        points = sorted(set(marks_base) | ({transition} if transition > 0 else set()))
        return total + integrate_1d(integrand, 0.0, cut, quad, points=points).value

    result = expectation_over_exponential(inner, quad)
    error = result.abs_error + quad.nested_allowance(result.value)
    return ExpectedCountResult(result.value, Method.EXACT, error, n)


def exact_term_expectation(
    n: float, i: int, rho: float, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """E(e^{-n P_i}) under the exact law of P_i."""
    return exact_exp_sum(n, i, rho, k_min=i, quad=quad).value


def poissonization_gap_bound(n: float, phi_n: float, x: float) -> float:
    """2 e^2 floor(x phi(n)) / n: distance between fixed-n and poissonized expected counts."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    return 2.0 * math.e**2 * math.floor(x * phi_n) / n
