import math

import pytest

from yule_bins.analytic_layer.quadrature import Unbounded
from yule_bins.rare_layer.regimes import (
    RegimeSpec,
    case2_exponent,
    case3_closed_form,
    case3_exponent,
    case3_integral,
    psi_ratio,
    regime_exponents_symbolic,
    regime_prediction,
    regime_thresholds,
    rho1_conditioned_limit,
    rho1_scaling,
)

RHO = 2.0
ALPHA = 0.22


def test_thresholds_and_exponents() -> None:
    delta0, delta1 = regime_thresholds(RHO, ALPHA)

    assert delta0 == pytest.approx(0.12)
    assert delta1 == pytest.approx(0.17)
    assert case2_exponent(RHO, ALPHA, 0.14) == pytest.approx(0.02)
    assert case3_exponent(RHO, ALPHA) == pytest.approx(0.05)


@pytest.mark.parametrize(
    "delta, case, exponent",
    [(0.10, 1, Unbounded.NEGATIVE), (0.14, 2, 0.02), (0.20, 3, 0.05)],
)
def test_regime_prediction_cases(delta: float, case: int, exponent) -> None:
    # Act
    prediction = regime_prediction(RegimeSpec(RHO, ALPHA, delta))

    # Assert
    assert prediction.case == case
    if case == 1:
        assert prediction.exponent is exponent
        assert prediction.prefactor == 0.0
    else:
        assert prediction.exponent == pytest.approx(exponent)
        assert prediction.prefactor > 0


def test_case3_prefactor_is_the_closed_form() -> None:
    prediction = regime_prediction(RegimeSpec(RHO, ALPHA, 0.3, x=1.5))

    assert prediction.prefactor == pytest.approx(case3_closed_form(1.5, RHO), rel=1e-12)


@pytest.mark.parametrize("rho", [1.5, 2.0, 3.0])
def test_case3_integral_without_cut_matches_closed_form(rho: float) -> None:
    assert case3_integral(1.0, rho) == pytest.approx(case3_closed_form(1.0, rho), rel=1e-12)


def test_case3_integral_decreases_with_the_cut() -> None:
    full = case3_integral(1.0, RHO)
    cut = case3_integral(1.0, RHO, lower_u=1.0)

    assert 0 < cut < full
    assert case3_integral(1.0, RHO, lower_u=math.inf) == 0.0


def test_psi_ratio_total_and_additivity() -> None:
    # Act
    total = psi_ratio(Unbounded.NEGATIVE, Unbounded.POSITIVE, RHO)
    below = psi_ratio(Unbounded.NEGATIVE, 0.0, RHO)
    above = psi_ratio(0.0, Unbounded.POSITIVE, RHO)

    # Assert
    assert total == pytest.approx(1.0, abs=1e-12)
    assert below + above == pytest.approx(1.0, abs=1e-7)
    assert 0 < below < 1


def test_psi_ratio_rejects_reversed_window() -> None:
    with pytest.raises(ValueError, match="y < z"):
        psi_ratio(1.0, 0.0, RHO)


def test_symbolic_exponents_vanish() -> None:
    identities = regime_exponents_symbolic()

    assert all(expr == 0 for expr in identities.values())


def test_regime_spec_validation() -> None:
    with pytest.raises(ValueError, match="alpha"):
        RegimeSpec(RHO, 0.25, 0.1)
    with pytest.raises(ValueError, match="critical"):
        case3_closed_form(1.0, 1.0)
    with pytest.raises(ValueError, match="rho > 1"):
        regime_thresholds(1.0, 0.3)


def test_rho1_limits() -> None:
    assert rho1_conditioned_limit(0.1, 1.0) == pytest.approx(0.1 / 3.0)
    assert rho1_conditioned_limit(0.5, 1.0) == pytest.approx(1.0 / 9.0)
    assert rho1_conditioned_limit(0.5, 2.0) == pytest.approx(8.0 / 9.0)


def test_rho1_scaling() -> None:
    n = 1e9

    window, norm = rho1_scaling(n, 1.0, beta=1.0)

    assert window == math.floor(n ** (1 / 3) / math.log(n))
    assert norm == pytest.approx(math.log(n) ** -2)
