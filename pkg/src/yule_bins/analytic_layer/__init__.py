"""Closed-form and quadrature limit laws."""

from yule_bins.analytic_layer.limit_laws import (
    LawId,
    LimitLawHandle,
    det_limit_intensity,
    expected_inv_d_rho,
    gumbel_cdf,
    laplace_functional_limit,
    mean_count_limit,
    mixed_poisson_count_pmf,
    nu_survival_limit,
    tn_cdf,
)
from yule_bins.analytic_layer.quadrature import (
    QuadratureError,
    QuadratureSpec,
    Transform,
    Unbounded,
)

__all__ = [
    "LawId",
    "LimitLawHandle",
    "QuadratureError",
    "QuadratureSpec",
    "Transform",
    "Unbounded",
    "det_limit_intensity",
    "expected_inv_d_rho",
    "gumbel_cdf",
    "laplace_functional_limit",
    "mean_count_limit",
    "mixed_poisson_count_pmf",
    "nu_survival_limit",
    "tn_cdf",
]
