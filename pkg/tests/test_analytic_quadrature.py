import math

import pytest

from yule_bins.analytic_layer.quadrature import (
    QuadratureError,
    QuadratureSpec,
    Transform,
    Unbounded,
    expectation_over_exponential,
    integrate_1d,
    is_unbounded,
)


@pytest.mark.parametrize("transform", [Transform.EXP_SUBSTITUTION, Transform.NONE])
def test_exponential_moments(transform: Transform) -> None:
    """E W = 1 and E W^2 = 2 for W ~ Exp(1), with either treatment of the weight."""

    # Arrange
    quad = QuadratureSpec(transform=transform)

    # Act
    first = expectation_over_exponential(lambda w: w, quad)
    second = expectation_over_exponential(lambda w: w * w, quad, peak=2.0)

    # Assert
    assert first.value == pytest.approx(1.0, rel=1e-8)
    assert second.value == pytest.approx(2.0, rel=1e-8)


def test_integrate_1d_with_breakpoint() -> None:
    result = integrate_1d(lambda x: abs(x - 0.3), 0.0, 1.0, points=[0.3, 5.0])

    assert result.value == pytest.approx(0.045 + 0.245, rel=1e-10)
    assert result.abs_error < 1e-9


def test_integrate_1d_reports_failure() -> None:
    coarse = QuadratureSpec(max_subdivisions=1)

    with pytest.raises(QuadratureError) as info:
        integrate_1d(lambda x: math.sin(50 * x), 0.0, 10.0, coarse)

    assert info.value.abs_error > 0


def test_spec_rejects_loose_tolerance() -> None:
    with pytest.raises(ValueError, match="relative_tolerance"):
        QuadratureSpec(relative_tolerance=1e-2)
    with pytest.raises(ValueError, match="max_subdivisions"):
        QuadratureSpec(max_subdivisions=0)


def test_refined_and_transform_coercion() -> None:
    quad = QuadratureSpec(relative_tolerance=1e-6, transform="none")

    assert quad.transform is Transform.NONE
    assert quad.refined(0.1).relative_tolerance == pytest.approx(1e-7)


@pytest.mark.parametrize(
    "func, lower, upper, exact",
    [
        (lambda x: 1 / (1 + x * x), 0.0, math.inf, math.pi / 2),
        (lambda x: math.sin(x) ** 2, 0.0, 10.0, 5.0 - math.sin(20.0) / 4),
        (lambda x: x**-0.5, 0.0, 1.0, 2.0),
    ],
)
def test_halving_tolerance_stays_within_reported_error(func, lower, upper, exact) -> None:
    # Arrange
    quad = QuadratureSpec(relative_tolerance=1e-6)

    # Act
    coarse = integrate_1d(func, lower, upper, quad)
    fine = integrate_1d(func, lower, upper, quad.refined())

    # Assert
    assert abs(fine.value - coarse.value) <= coarse.abs_error
    assert fine.value == pytest.approx(exact, rel=1e-6)


def test_nested_allowance() -> None:
    quad = QuadratureSpec(relative_tolerance=1e-6)

    assert quad.nested_allowance(-2.0) == pytest.approx(2e-6 + quad.absolute_tolerance)


def test_unbounded_marker() -> None:
    assert is_unbounded(Unbounded.POSITIVE)
    assert not is_unbounded(math.inf)
    assert Unbounded.NEGATIVE.value == "-inf"
