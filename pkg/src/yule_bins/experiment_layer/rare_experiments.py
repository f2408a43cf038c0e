"""Experiments on the rare-event regime rho >= 1 of the empty-bin counts at scale n^alpha."""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from yule_bins.analytic_layer.limit_laws import expected_inv_d_rho
from yule_bins.analytic_layer.quadrature import DEFAULT_QUADRATURE, Unbounded
from yule_bins.experiment_layer.base_experiment import (
    BaseExperiment,
    CheckResult,
    ExperimentContext,
    ExperimentOutcome,
    ReferenceSource,
    bound_check,
    compare,
    require,
)
from yule_bins.model_layer.occupancy import ThrowMode, power_truncation, throw_balls
from yule_bins.model_layer.point_process import Rectangle, ScaleDescriptor, empty_bin_process
from yule_bins.model_layer.probabilities import bin_probabilities
from yule_bins.model_layer.rng import RngStream, run_replications
from yule_bins.model_layer.splits import sample_d_rho, sample_splits
from yule_bins.rare_layer.conditional import conditional_occupancy_experiment
from yule_bins.rare_layer.expected_counts import (
    ExpectedCountResult,
    MethodDisagreementError,
    conditioned_exp_sum,
    cross_validate_exp_sum,
    exact_exp_sum,
    expected_exp_sum,
    poissonization_gap_bound,
)
from yule_bins.rare_layer.regimes import (
    RegimeSpec,
    case3_integral,
    psi_ratio,
    regime_exponents_symbolic,
    regime_prediction,
    regime_thresholds,
    rho1_conditioned_limit,
    rho1_scaling,
)
from yule_bins.stats_layer.samples import EstimateWithCI, binomial_estimate, mean_estimate

logger = logging.getLogger(__name__)

CLOSED = ReferenceSource.CLOSED_FORM
QUAD = ReferenceSource.QUADRATURE
ORACLE = ReferenceSource.MC_ORACLE


def window_size(n: float, alpha: float, x: float) -> int:
    """Number of bins floor(x n^alpha) in the scaled window [0, x]."""
    return ScaleDescriptor.power(n, alpha).index_bound(x)


def log_slope(n_grid: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log values against log n."""
    return float(np.polyfit(np.log(n_grid), np.log(values), 1)[0])


COUNT_COLUMNS = ["n", "rho", "alpha", "delta", "method", "value", "error_estimate", "seed"]


def count_rows(
    results: Sequence[ExpectedCountResult], rho: float, alpha: float, delta: float, seed: int = 0
) -> List[Dict[str, Any]]:
    """One plot row per sum; alpha and delta are nan where they do not apply."""
    return [
        {
            "n": r.n,
            "rho": rho,
            "alpha": alpha,
            "delta": delta,
            "method": r.method.value,
            "value": r.value,
            "error_estimate": r.error_estimate,
            "seed": seed,
        }
        for r in results
    ]


class RareRegimesExperiment(BaseExperiment):
    """Growth exponents, regime structure and the psi profile of the expected counts."""

    experiment_id = "rare-regimes"
    anchor = "growth regimes of the conditioned expected count and the psi share of t_k windows"
    defaults = {
        "rho": 2.0,
        "alpha": 0.22,
        "x": 1.0,
        "n_grid": [float(v) for v in np.logspace(10, 14, 9)],
        "case1_delta": 0.06,
        "case2_delta": 0.14,
        "case3_delta": 0.25,
        "slope_tolerance": 0.01,
        "prefactor_tolerance": 0.05,
        "psi_n": 1e12,
        "psi_window": [-1.0, 1.0],
        "psi_tolerance": 0.05,
        "crosscheck_n": 1e6,
        "crosscheck_rhos": [1.0, 1.5, 2.0],
        "crosscheck_k_min": 25,
        "crosscheck_k_max": 60,
        "crosscheck_replications": 20000,
        "conditional_n": 1e6,
        "conditional_replications": 2000,
    }

    def check_parameters(self, parameters: Dict[str, Any]) -> None:
        rho, alpha = parameters["rho"], parameters["alpha"]
        require(rho > 1, "rho must exceed 1")
        delta0, delta1 = regime_thresholds(rho, alpha)
        for case in (1, 2, 3):
            RegimeSpec(rho, alpha, parameters[f"case{case}_delta"], x=parameters["x"])
        require(parameters["case1_delta"] < delta0, f"case1_delta must lie below delta0={delta0:.6g}")
        require(
            delta0 <= parameters["case2_delta"] < delta1,
            f"case2_delta must lie in [{delta0:.6g}, {delta1:.6g})",
        )
        require(parameters["case3_delta"] >= delta1, f"case3_delta must be >= delta1={delta1:.6g}")
        require(len(parameters["n_grid"]) >= 3, "n_grid needs at least three points")
        require(all(n >= 3 for n in parameters["n_grid"]), "n_grid values must be >= 3")
        low, high = parameters["psi_window"] if len(parameters["psi_window"]) == 2 else (0, 0)
        require(low < high, "psi_window must be an increasing pair")
        require(delta1 * math.log(parameters["psi_n"]) + low > 0, "psi window must start above t = 0")
        require(all(r >= 1 for r in parameters["crosscheck_rhos"]), "crosscheck_rhos must be >= 1")
        require(
            0 < parameters["crosscheck_k_min"] <= parameters["crosscheck_k_max"],
            "need 0 < crosscheck_k_min <= crosscheck_k_max",
        )
        require(parameters["crosscheck_replications"] >= 2, "crosscheck_replications must be >= 2")
        require(parameters["conditional_replications"] >= 2, "conditional_replications must be >= 2")
        require(
            delta1 * math.log(parameters["conditional_n"]) + low > 0,
            "conditional window must start above t = 0",
        )

    def execute(self, context: ExperimentContext) -> ExperimentOutcome:
        p = context.parameters
        outcome = ExperimentOutcome(self.experiment_id)
        outcome.checks.extend(self._growth(p, outcome))
        outcome.checks.extend(self._psi(p, outcome))
        outcome.checks.extend(self._cross_validation(context, outcome))
        for name, value in regime_exponents_symbolic().items():
            outcome.checks.append(
                compare("symbolic-exponent", float(value), 0.0, CLOSED, parameter=name,
                        rho=p["rho"], alpha=p["alpha"])
            )
        outcome.checks.append(self._conditional(context))
        return outcome

    def _growth(self, p: Dict[str, Any], outcome: ExperimentOutcome) -> List[CheckResult]:
        rho, alpha, x = p["rho"], p["alpha"], p["x"]
        grid = list(p["n_grid"])
        labels = {"rho": rho, "alpha": alpha, "x": x}
        tol = p["slope_tolerance"]

        plain_results = [expected_exp_sum(n, window_size(n, alpha, x), rho) for n in grid]
        conditioned_results = {
            case: [
                conditioned_exp_sum(n, window_size(n, alpha, x), rho, p[f"case{case}_delta"] * math.log(n))
                for n in grid
            ]
            for case in (1, 2, 3)
        }
        plain = [r.value for r in plain_results]
        conditioned = {case: [r.value for r in rs] for case, rs in conditioned_results.items()}
        rows = count_rows(plain_results, rho, alpha, math.nan)
        for case, results in conditioned_results.items():
            rows.extend(count_rows(results, rho, alpha, p[f"case{case}_delta"]))
        outcome.plots["expected_counts"] = pd.DataFrame(rows, columns=COUNT_COLUMNS)
        predictions = {
            case: regime_prediction(RegimeSpec(rho, alpha, p[f"case{case}_delta"], x=x)) for case in (1, 2, 3)
        }

        checks = []
        exponent = float(predictions[3].exponent)
        checks.append(compare("unconditioned-slope", log_slope(grid, plain), exponent, QUAD,
                              abs_tolerance=tol, **labels))
        top = grid[-1]
        prefactor = plain[-1] / top**exponent
        checks.append(compare("case3-prefactor", prefactor, case3_integral(x, rho), QUAD,
                              rel_tolerance=p["prefactor_tolerance"], n=top, **labels))

        case1_delta = p["case1_delta"]
        ratio = np.asarray(conditioned[1]) / np.asarray(plain)
        checks.append(
            CheckResult("case1-ratio-decreasing", float(ratio[-1]), float(ratio[0]), QUAD, 0.0,
                        bool(np.all(np.diff(ratio) < 0)), delta=case1_delta, n=top, **labels)
        )
        checks.append(bound_check("case1-slope", log_slope(grid, conditioned[1]), 0.0, QUAD,
                                  delta=case1_delta, **labels))
        for case in (2, 3):
            checks.append(
                compare(f"case{case}-slope", log_slope(grid, conditioned[case]),
                        float(predictions[case].exponent), QUAD, abs_tolerance=tol,
                        delta=p[f"case{case}_delta"], **labels)
            )
        outcome.notes["case1_ratio_at_top"] = float(ratio[-1])
        outcome.plots["growth"] = pd.DataFrame({
            "n": grid,
            "unconditioned": plain,
            "case1": conditioned[1],
            "case2": conditioned[2],
            "case3": conditioned[3],
        })
        return checks

    def _psi(self, p: Dict[str, Any], outcome: ExperimentOutcome) -> List[CheckResult]:
        rho, alpha, x, n = p["rho"], p["alpha"], p["x"], p["psi_n"]
        low, high = p["psi_window"]
        _, delta1 = regime_thresholds(rho, alpha)
        k_max = window_size(n, alpha, x)
        center = delta1 * math.log(n)
        labels = {"rho": rho, "alpha": alpha, "x": x, "n": n, "parameter": f"window=[{low:g},{high:g}]"}

        share = (
            conditioned_exp_sum(n, k_max, rho, center + high, center + low).value
            / expected_exp_sum(n, k_max, rho).value
        )
        psi = psi_ratio(low, high, rho)
        below = psi_ratio(Unbounded.NEGATIVE, low, rho)
        above = psi_ratio(high, Unbounded.POSITIVE, rho)
        total = psi_ratio(Unbounded.NEGATIVE, Unbounded.POSITIVE, rho)

        shifts = np.linspace(-3.0, 3.0, 13)
        outcome.plots["psi_profile"] = pd.DataFrame({
            "z": shifts,
            "psi_below": [psi_ratio(Unbounded.NEGATIVE, z, rho) for z in shifts],
        })
        return [
            compare("psi-ratio", share, psi, QUAD, rel_tolerance=p["psi_tolerance"], **labels),
            compare("psi-additivity", below + psi + above, total, QUAD, abs_tolerance=1e-9, **labels),
            compare("psi-total-mass", total, 1.0, CLOSED, abs_tolerance=1e-9, **labels),
        ]

    def _cross_validation(
        self, context: ExperimentContext, outcome: ExperimentOutcome
    ) -> List[CheckResult]:
        p = context.parameters
        rows: List[Dict[str, Any]] = []
        n, k_min, k_max = p["crosscheck_n"], p["crosscheck_k_min"], p["crosscheck_k_max"]
        reps = p["crosscheck_replications"]
        checks = []
        for block, rho in enumerate(p["crosscheck_rhos"]):
            labels = {"rho": rho, "n": n, "parameter": f"i={k_min}..{k_max}"}
            checks.append(self._refinement(n, k_min, k_max, rho, labels))
            try:
                quadrature, oracle = cross_validate_exp_sum(
                    n, k_max, rho, context.stream(block), k_min=k_min, replications=reps
                )
                rows.extend(count_rows([quadrature], rho, math.nan, math.nan))
                rows.extend(count_rows([oracle], rho, math.nan, math.nan, context.master_seed))
                estimate = EstimateWithCI(oracle.value, oracle.error_estimate, reps, context.master_seed)
                checks.append(compare("quadrature-vs-oracle", estimate, quadrature.value, QUAD,
                                      n_sigma=3.0, rel_tolerance=0.02, **labels))
            except MethodDisagreementError as exc:
                logger.warning("rho=%g: %s", rho, exc)
                rows.extend(count_rows([exc.quadrature], rho, math.nan, math.nan))
                rows.extend(count_rows([exc.oracle], rho, math.nan, math.nan, context.master_seed))
                checks.append(
                    CheckResult("quadrature-vs-oracle", exc.oracle.value, exc.quadrature.value, QUAD,
                                0.0, False, exc.oracle.error_estimate, **labels)
                )

        rho = max(p["crosscheck_rhos"])
        if rho > 1:
            stream = context.stream(len(p["crosscheck_rhos"]))
            rejected = False
            try:
                cross_validate_exp_sum(n, k_max, rho, stream, k_min=k_min, replications=reps,
                                       printed_exponent=True)
            except MethodDisagreementError as exc:
                rejected = True
                logger.info("printed exponent rejected at rho=%g: %s", rho, exc)
            checks.append(
                CheckResult("printed-exponent-rejected", float(rejected), 1.0, ORACLE, 0.0, rejected,
                            rho=rho, n=n, parameter=f"i={k_min}..{k_max}")
            )
        outcome.plots["crosscheck_counts"] = pd.DataFrame(rows, columns=COUNT_COLUMNS)
        return checks

    @staticmethod
    def _refinement(
        n: float, k_min: int, k_max: int, rho: float, labels: Dict[str, Any]
    ) -> CheckResult:
        """Halving the relative tolerance moves the quadrature sum by less than its error."""
        coarse = expected_exp_sum(n, k_max, rho, k_min=k_min, quad=DEFAULT_QUADRATURE)
        fine = expected_exp_sum(n, k_max, rho, k_min=k_min, quad=DEFAULT_QUADRATURE.refined())
        return compare("quadrature-refinement", fine.value, coarse.value, QUAD,
                       abs_tolerance=coarse.error_estimate, **labels)

    def _conditional(self, context: ExperimentContext) -> CheckResult:
        """Conditioned simulation against the conditioned quadrature around delta1 log n."""
        p = context.parameters
        rho, alpha, x, n = p["rho"], p["alpha"], p["x"], p["conditional_n"]
        low, high = p["psi_window"]
        _, delta1 = regime_thresholds(rho, alpha)
        center = delta1 * math.log(n)
        window = (center + low, center + high)

        stream = context.stream(len(p["crosscheck_rhos"]) + 1)
        simulated = conditional_occupancy_experiment(
            n, rho, window, x, alpha, p["conditional_replications"], stream, context.threads
        )
        k_max = window_size(n, alpha, x)
        quadrature = conditioned_exp_sum(n, k_max, rho, window[1], window[0]).value
        gap = poissonization_gap_bound(n, ScaleDescriptor.power(n, alpha).phi, x)
        return compare("conditional-simulation", simulated, quadrature, QUAD, n_sigma=3.0,
                       rel_tolerance=0.05, abs_tolerance=gap, rho=rho, alpha=alpha, x=x, n=n,
                       parameter=f"t_k in [{window[0]:.4g},{window[1]:.4g}]")


class DoubleThresholdExperiment(BaseExperiment):
    """Vanishing probability of any empty bin alongside a growing expected count."""

    experiment_id = "double-threshold"
    anchor = "double threshold: convergence to 0 in distribution with divergent means"
    defaults = {
        "rho": 2.0,
        "alpha": 0.22,
        "x": 1.0,
        "n_low": 1e4,
        "n_high": 1e6,
        "replications": 4000,
        "reference_probability": 0.05,
    }

    def check_parameters(self, parameters: Dict[str, Any]) -> None:
        RegimeSpec(parameters["rho"], parameters["alpha"], 0.0, x=parameters["x"])
        require(parameters["rho"] > 1, "rho must exceed 1")
        require(3 <= parameters["n_low"] < parameters["n_high"], "need 3 <= n_low < n_high")
        require(parameters["replications"] >= 100, "replications must be >= 100")
        require(0 < parameters["reference_probability"] < 1, "reference_probability must lie in (0, 1)")

    def _simulate(self, n: float, context: ExperimentContext, block: int) -> Tuple[EstimateWithCI, EstimateWithCI]:
        p = context.parameters
        rho, alpha, x = p["rho"], p["alpha"], p["x"]
        scale = ScaleDescriptor.power(n, alpha)
        window = Rectangle(x)
        n_bins = power_truncation(n, alpha, x)

        def replicate(stream: RngStream) -> int:
            gen = stream.generator()
            occ = throw_balls(bin_probabilities(sample_splits(n_bins, gen), rho), n, ThrowMode.POISSONIZED, gen)
            return empty_bin_process(occ, 0, scale).count_in(window)

        counts = np.asarray(run_replications(replicate, p["replications"], context.stream(block), context.threads))
        hit = binomial_estimate(int(np.count_nonzero(counts)), counts.size, context.master_seed)
        return hit, mean_estimate(counts, context.master_seed)

    def execute(self, context: ExperimentContext) -> ExperimentOutcome:
        p = context.parameters
        rho, alpha, x = p["rho"], p["alpha"], p["x"]
        n_low, n_high = p["n_low"], p["n_high"]
        labels = {"rho": rho, "alpha": alpha, "x": x}
        outcome = ExperimentOutcome(self.experiment_id)

        hit_low, _ = self._simulate(n_low, context, 0)
        hit_high, mean_high = self._simulate(n_high, context, 1)
        drop = hit_low.value - hit_high.value
        drop_se = math.hypot(hit_low.stderr, hit_high.stderr)
        outcome.checks.append(
            bound_check("hit-probability-drop", drop, 3.0 * drop_se, CLOSED, below=False, stderr=drop_se,
                        parameter=f"n={n_low:g}->{n_high:g}", **labels)
        )

        # exact finite-i law, bins 1..floor(x n^alpha)
        exact_low = exact_exp_sum(n_low, window_size(n_low, alpha, x), rho).value
        exact_high = exact_exp_sum(n_high, window_size(n_high, alpha, x), rho).value
        outcome.checks.append(
            bound_check("mean-growth", exact_high / exact_low, 1.0, QUAD, below=False,
                        parameter=f"n={n_low:g}->{n_high:g}", **labels)
        )
        outcome.checks.append(
            compare("mean-simulation", mean_high, exact_high, QUAD, n_sigma=3.0, rel_tolerance=0.05,
                    n=n_high, **labels)
        )

        decay = ((rho + 1.0) * alpha - 1.0) / rho
        outcome.notes["hit_probability"] = {
            "n_low": hit_low.value,
            "n_high": hit_high.value,
            "reference": p["reference_probability"],
            "below_reference": hit_high.value < p["reference_probability"],
        }
        outcome.notes["decay_exponent"] = {
            "predicted": decay,
            "two_point": math.log(hit_high.value / hit_low.value) / math.log(n_high / n_low)
            if hit_low.value > 0 and hit_high.value > 0 else None,
        }
        outcome.plots["double_threshold"] = pd.DataFrame({
            "n": [n_low, n_high],
            "hit_probability": [hit_low.value, hit_high.value],
            "hit_stderr": [hit_low.stderr, hit_high.stderr],
            "expected_count": [exact_low, exact_high],
        })
        return outcome


class Rho1CriticalExperiment(BaseExperiment):
    """Logarithmic growth of the conditioned counts at rho = 1."""

    experiment_id = "rho1-critical"
    anchor = "rho = 1 critical law: linear growth in a up to 1/3, then saturation"
    defaults = {
        "n": 1e10,
        "x": 1.0,
        "a_grid": [0.05, 0.1, 0.15, 0.2, 0.45, 0.5, 0.55, 0.6],
        "beta": 0.0,
        "ratio_tolerance": 0.05,
        "d_mean_draws": 1000000,
    }

    def check_parameters(self, parameters: Dict[str, Any]) -> None:
        require(parameters["n"] >= 3, "n must be >= 3")
        require(parameters["x"] > 0, "x must be positive")
        grid = parameters["a_grid"]
        require(all(a > 0 for a in grid), "a_grid must be positive")
        require(sum(a < 1.0 / 3.0 for a in grid) >= 2, "a_grid needs two points below 1/3")
        require(any(a > 1.0 / 3.0 for a in grid), "a_grid needs a point above 1/3")
        require(parameters["beta"] >= 0, "beta must be non-negative")
        require(parameters["ratio_tolerance"] > 0, "ratio_tolerance must be positive")
        require(parameters["d_mean_draws"] >= 2, "d_mean_draws must be >= 2")

    def execute(self, context: ExperimentContext) -> ExperimentOutcome:
        p = context.parameters
        n, x = p["n"], p["x"]
        k, norm = rho1_scaling(n, x, p["beta"])
        log_n = math.log(n)
        grid = np.asarray(p["a_grid"], dtype=float)
        scaled = np.asarray([conditioned_exp_sum(n, k, 1.0, a * log_n).value / norm for a in grid])

        linear = grid < 1.0 / 3.0
        slope = float(np.polyfit(grid[linear], scaled[linear], 1)[0])
        plateau = float(scaled[~linear].mean())
        labels = {"rho": 1.0, "n": n, "x": x, "parameter": f"beta={p['beta']:g}"}

        outcome = ExperimentOutcome(self.experiment_id)
        outcome.checks.append(
            compare("plateau-over-slope", plateau / slope, 1.0 / 3.0, CLOSED,
                    rel_tolerance=p["ratio_tolerance"], **labels)
        )
        draws = sample_d_rho(1.0, context.stream(0), size=p["d_mean_draws"])
        outcome.checks.append(
            compare("d1-inverse-mean", mean_estimate(1.0 / draws, context.master_seed),
                    expected_inv_d_rho(1.0), CLOSED, rel_tolerance=0.10, rho=1.0)
        )
        outcome.notes["slope"] = {"measured": slope, "limit": x**3 / 3.0}
        outcome.notes["plateau"] = {"measured": plateau, "limit": rho1_conditioned_limit(1.0, x)}
        outcome.plots["rho1_profile"] = pd.DataFrame({
            "a": grid,
            "scaled_sum": scaled,
            "limit": [rho1_conditioned_limit(a, x) for a in grid],
        })
        return outcome
