import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Sequence

import numpy as np
import pandas as pd

from misspec_bounds.bounds import bound_report, efficient_estimator_map, naive_efficient_estimator_map
from misspec_bounds.checkers.efficiency_checker import check_efficiency, check_efficiency_sweep
from misspec_bounds.checkers.order_checker import OrderChecker
from misspec_bounds.checkers.proportional_score_checker import check_proportional_score, fit_proportional_score
from misspec_bounds.checkers.unbiasedness_checker import check_unbiasedness, max_z, unbiasedness_z
from misspec_bounds.densities.builtins import (
    box1_problem,
    box3_problem,
    doa_problem,
    linear_problem,
    random_white_problem,
)
from misspec_bounds.equivalent_model import (
    EquivalentModel,
    g_function,
    naive_mcrb_through_equivalent,
    normalization_residual,
    verify_proportional_score,
)
from misspec_bounds.estimators import (
    first_sample_estimator,
    mml_estimator,
    oracle_ml_estimator,
    paired_score_bias,
    run_trials,
)
from misspec_bounds.information import info_analytic, info_monte_carlo
from misspec_bounds.models.experiment_config import ExperimentConfig
from misspec_bounds.models.monte_carlo_estimate import MonteCarloEstimate
from misspec_bounds.models.result_table import CheckOutcome, ResultTable, ScenarioResult
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.sampling import random_spd
from misspec_bounds.pseudo_true import pseudo_true_jacobian, pseudo_true_jacobian_fd, solve_pseudo_true

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-12
MSE_Z = 3.0
JACOBIAN_REL_TOL = 1e-3
CHECK_DRAWS = 1000


def _rel_err(estimate, reference) -> float:
    estimate, reference = np.asarray(estimate, dtype=float), np.asarray(reference, dtype=float)
    return float(np.linalg.norm(estimate - reference) / max(np.linalg.norm(reference), np.finfo(float).tiny))


def _scalar(m) -> float:
    return float(np.asarray(m).reshape(-1)[0])


class ScenarioRunner:
    """
    Runs one named scenario and collects its tables and scientific checks.

    Sweep points run concurrently on a thread pool; tables are assembled in
    sweep order. Every sweep point draws from its own RngStream, so output
    does not depend on the worker count.
    """

    def __init__(self):
        self.scenarios: Dict[str, Callable[[ExperimentConfig, ScenarioResult], None]] = {}
        self.order_checker = OrderChecker()

    def initiate(self) -> None:
        self.order_checker.initiate()
        self.scenarios = {
            "box1": self.run_box1,
            "box2": self.run_box2,
            "box3": self.run_box3,
            "box4": self.run_box4,
            "doa_sweep": self.run_doa_sweep,
            "random_order_check": self.run_random_order_check,
        }

    def run(self, config: ExperimentConfig) -> ScenarioResult:
        """
        Parameters:
            config (ExperimentConfig): Validated configuration.

        Returns:
            ScenarioResult: Tables in emission order and every check outcome.
        """
        result = ScenarioResult(config.scenario)
        logger.info("Running %s with seed %d", config.scenario, config.seed)
        self.scenarios[config.scenario](config, result)
        for failure in result.failures():
            logger.error("Check failed: %s (%s)", failure.name, failure.detail)
        logger.info("%s: %d/%d checks passed", config.scenario, len(result.checks) - len(result.failures()), len(result.checks))
        return result

    @staticmethod
    def _check(result: ScenarioResult, name: str, passed, detail: str = "") -> None:
        result.checks.append(CheckOutcome(f"{result.scenario}.{name}", bool(passed), detail))

    @staticmethod
    def _map_points(fn: Callable, items: Sequence, workers: int) -> List:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(fn, *zip(*enumerate(items)))) if items else []

    # box1 and box2 share the same single-entry model

    def _box_point(self, config: ExperimentConfig, index: int, N: int, theta0: float, with_oracle: bool = False) -> Dict:
        problem = box1_problem(N, config.sigma2, config.epsilon, theta0)
        solution = solve_pseudo_true(problem)
        info = info_analytic(problem, solution.theta_star)
        report = bound_report(info)
        stream = RngStream(config.seed, stream_id=index)
        point = {
            "N": N,
            "problem": problem,
            "solution": solution,
            "info": info,
            "report": report,
            "x1": run_trials(
                problem, first_sample_estimator(), solution.theta_star, info, config.n_trials, stream.child(0), config.batch_size
            ),
            "mml": run_trials(
                problem, mml_estimator(problem), solution.theta_star, info, config.n_trials, stream.child(1), config.batch_size
            ),
        }
        if with_oracle:
            point["oracle"] = run_trials(
                problem, oracle_ml_estimator(problem), solution.theta_star, info, config.n_trials, stream.child(2), config.batch_size
            )
        return point

    def _focus_point(self, config: ExperimentConfig, points: List[Dict], with_oracle: bool = False) -> Dict:
        for point in points:
            if point["N"] == config.N:
                return point
        return self._box_point(config, len(points), config.N, config.theta0, with_oracle)

    def run_box1(self, config: ExperimentConfig, result: ScenarioResult) -> None:
        """MSE of x_1 and of the MML estimator against the MCRB and oracle CRB, sweeping N."""
        eps, s2 = config.epsilon, config.sigma2
        points = self._map_points(
            lambda i, N: self._box_point(config, i, N, config.theta0), config.N_sweep, config.workers
        )
        rows, bias_rows = [], []
        for p in points:
            x1, mml = p["x1"], p["mml"]
            rows.append(
                {
                    "N": p["N"],
                    "mse_x1": _scalar(x1.empirical_mse.value),
                    "mse_mml": _scalar(mml.empirical_mse.value),
                    "mcrb": _scalar(p["report"].mcrb),
                    "crb": _scalar(p["report"].crb),
                    "se_x1": _scalar(x1.empirical_mse.std_error),
                    "se_mml": _scalar(mml.empirical_mse.std_error),
                }
            )
            bias_rows.append(
                {
                    "N": p["N"],
                    "bias_x1": _scalar(x1.regular_bias.value),
                    "se_bias_x1": _scalar(x1.regular_bias.std_error),
                    "bias_mml": _scalar(mml.regular_bias.value),
                    "se_bias_mml": _scalar(mml.regular_bias.std_error),
                    "score_bias_x1": _scalar(x1.score_bias.value),
                    "se_score_bias_x1": _scalar(x1.score_bias.std_error),
                    "score_bias_mml": _scalar(mml.score_bias.value),
                    "se_score_bias_mml": _scalar(mml.score_bias.std_error),
                }
            )
        columns = ["N", "mse_x1", "mse_mml", "mcrb", "crb", "se_x1", "se_mml"]
        result.tables["box1"] = ResultTable("box1", pd.DataFrame(rows, columns=columns))
        bias_columns = [
            "N", "bias_x1", "se_bias_x1", "bias_mml", "se_bias_mml",
            "score_bias_x1", "se_score_bias_x1", "score_bias_mml", "se_score_bias_mml",
        ]
        result.tables["box1_bias"] = ResultTable("box1_bias", pd.DataFrame(bias_rows, columns=bias_columns))

        worst = max((abs(r["mcrb"] - (eps + (r["N"] - 1) * s2) / r["N"] ** 2) for r in rows), default=0.0)
        self._check(result, "mcrb_closed_form", worst <= EXACT_TOL, f"max deviation {worst:.3e}")
        worst = max((abs(r["crb"] - 1.0 / (1.0 / eps + (r["N"] - 1) / s2)) for r in rows), default=0.0)
        self._check(result, "crb_closed_form", worst <= EXACT_TOL, f"max deviation {worst:.3e}")
        worst = max((abs(_scalar(p["solution"].theta_star) - config.theta0) for p in points), default=0.0)
        self._check(result, "pseudo_true_is_true_parameter", worst <= 1e-10, f"max |theta* - theta0| {worst:.3e}")

        focus = self._focus_point(config, points)
        problem, info, report = focus["problem"], focus["info"], focus["report"]
        theta_star = focus["solution"].theta_star
        mcrb = _scalar(report.mcrb)
        x1, mml = focus["x1"], focus["mml"]

        jac = pseudo_true_jacobian(problem, theta_star, info)
        jac_fd = pseudo_true_jacobian_fd(problem, theta_star)
        self._check(
            result,
            "pseudo_true_jacobian",
            abs(_scalar(jac) - 1.0) <= 1e-8 and _rel_err(jac_fd, jac) <= JACOBIAN_REL_TOL,
            f"A^-1 B_pf={_scalar(jac):.15g} finite difference={_scalar(jac_fd):.15g}",
        )

        mse_x1, se_x1 = _scalar(x1.empirical_mse.value), _scalar(x1.empirical_mse.std_error)
        self._check(result, "x1_mse_is_epsilon", abs(mse_x1 - eps) <= MSE_Z * se_x1, f"{mse_x1:.6g} +- {se_x1:.2g} vs {eps}")
        self._check(result, "x1_below_mcrb", mse_x1 < mcrb, f"{mse_x1:.6g} vs MCRB {mcrb:.6g}")
        mse_mml, se_mml = _scalar(mml.empirical_mse.value), _scalar(mml.empirical_mse.std_error)
        self._check(result, "mml_attains_mcrb", abs(mse_mml - mcrb) <= MSE_Z * se_mml, f"{mse_mml:.6g} +- {se_mml:.2g} vs {mcrb:.6g}")

        z = config.z_threshold
        x1_verdicts = check_unbiasedness(x1, ("pointwise", "revised_local"), z)
        self._check(result, "x1_pointwise_unbiased", x1_verdicts["pointwise"], f"z={unbiasedness_z(x1, 'pointwise'):.2f}")
        expected_residual = eps / s2 - (eps + (config.N - 1) * s2) / (config.N * s2)
        self._check(
            result,
            "x1_violates_revised_unbiasedness",
            not x1_verdicts["revised_local"] and max_z(x1.score_bias, expected_residual) <= z,
            f"score bias {_scalar(x1.score_bias.value):.6g} expected {expected_residual:.6g}",
        )
        self._check(
            result,
            "mml_revised_unbiased",
            check_unbiasedness(mml, "revised_local", z)["revised_local"],
            f"z={unbiasedness_z(mml, 'revised_local'):.2f}",
        )
        mml_eff = check_efficiency(mml, report, z)
        x1_eff = check_efficiency(x1, report, z)
        self._check(result, "mml_efficient", mml_eff["attains_mcrb"] and mml_eff["is_mml_consistent"], str(mml_eff))
        self._check(result, "x1_not_efficient", not x1_eff["attains_mcrb"] and not x1_eff["is_mml_consistent"], str(x1_eff))

        draws = problem.sample(RngStream(config.seed, stream_id=len(config.N_sweep) + 1), CHECK_DRAWS)
        efficient = efficient_estimator_map(info, theta_star, problem.assumed_model)
        gap = float(np.max(np.abs(efficient(draws) - mml_estimator(problem)(draws))))
        self._check(result, "efficient_map_is_mml", gap <= EXACT_TOL, f"max difference {gap:.3e}")

        def sweep_point(i, theta0):
            p = self._box_point(config, 10000 + i, config.N, theta0)
            return theta0, p["mml"], p["report"]

        sweep = self._map_points(sweep_point, config.theta0_sweep, config.workers)
        consistent, per_point = check_efficiency_sweep(sweep, z)
        self._check(
            result,
            "mml_efficiency_sweep",
            consistent and all(r["attains_mcrb"] for r in per_point),
            "; ".join(f"theta0={r['theta0']}: {r['attains_mcrb']}/{r['is_mml_consistent']}" for r in per_point),
        )

    def run_box2(self, config: ExperimentConfig, result: ScenarioResult) -> None:
        """Naive MCRB, oracle CRB and the oracle ML estimator on the box1 model."""
        eps, s2 = config.epsilon, config.sigma2
        points = self._map_points(
            lambda i, N: self._box_point(config, i, N, config.theta0, with_oracle=True), config.N_sweep, config.workers
        )
        rows = []
        for p in points:
            rows.append(
                {
                    "N": p["N"],
                    "mse_x1": _scalar(p["x1"].empirical_mse.value),
                    "mse_mml": _scalar(p["mml"].empirical_mse.value),
                    "mse_oracle": _scalar(p["oracle"].empirical_mse.value),
                    "mcrb": _scalar(p["report"].mcrb),
                    "nmcrb": _scalar(p["report"].nmcrb),
                    "crb": _scalar(p["report"].crb),
                    "se_x1": _scalar(p["x1"].empirical_mse.std_error),
                    "se_mml": _scalar(p["mml"].empirical_mse.std_error),
                    "se_oracle": _scalar(p["oracle"].empirical_mse.std_error),
                }
            )
        columns = ["N", "mse_x1", "mse_mml", "mse_oracle", "mcrb", "nmcrb", "crb", "se_x1", "se_mml", "se_oracle"]
        result.tables["box2"] = ResultTable("box2", pd.DataFrame(rows, columns=columns))
        self._check(result, "order_relation", all(p["report"].order_ok for p in points))

        focus = self._focus_point(config, points, with_oracle=True)
        problem, info, report = focus["problem"], focus["info"], focus["report"]
        theta_star = focus["solution"].theta_star
        N = config.N
        nmcrb, crb = _scalar(report.nmcrb), _scalar(report.crb)
        closed = eps / ((N - 1) * eps / s2 + 1)
        self._check(
            result,
            "nmcrb_is_oracle_crb",
            abs(nmcrb - closed) <= EXACT_TOL and abs(nmcrb - crb) <= EXACT_TOL,
            f"nMCRB={nmcrb:.17g} closed form={closed:.17g} CRB={crb:.17g}",
        )
        oracle, x1 = focus["oracle"], focus["x1"]
        mse_o, se_o = _scalar(oracle.empirical_mse.value), _scalar(oracle.empirical_mse.std_error)
        self._check(result, "oracle_attains_nmcrb", abs(mse_o - nmcrb) <= MSE_Z * se_o, f"{mse_o:.6g} +- {se_o:.2g} vs {nmcrb:.6g}")
        mse_x1, se_x1 = _scalar(x1.empirical_mse.value), _scalar(x1.empirical_mse.std_error)
        self._check(result, "x1_above_nmcrb", mse_x1 >= nmcrb - MSE_Z * se_x1, f"{mse_x1:.6g} vs {nmcrb:.6g}")
        self._check(
            result,
            "oracle_naive_local_unbiased",
            check_unbiasedness(oracle, "naive_local", config.z_threshold)["naive_local"],
            f"z={unbiasedness_z(oracle, 'naive_local'):.2f}",
        )

        stream = RngStream(config.seed, stream_id=len(config.N_sweep) + 1)
        draws = problem.sample(stream.child(0), CHECK_DRAWS)
        naive = naive_efficient_estimator_map(info, theta_star, problem.true_model, problem.theta0)
        gap = float(np.max(np.abs(naive(draws) - oracle_ml_estimator(problem)(draws))))
        self._check(result, "naive_map_is_oracle_ml", gap <= EXACT_TOL, f"max difference {gap:.3e}")
        naive_trials = run_trials(problem, naive, theta_star, info, config.n_trials, stream.child(1), config.batch_size)
        mse_n = _scalar(naive_trials.empirical_mse.value)
        self._check(result, "naive_map_mse", abs(mse_n - nmcrb) <= 0.02 * nmcrb, f"{mse_n:.6g} vs {nmcrb:.6g}")

        white = box1_problem(N, s2, s2, config.theta0)
        white_draws = white.sample(stream.child(2), CHECK_DRAWS)
        gap = float(np.max(np.abs(oracle_ml_estimator(white)(white_draws) - mml_estimator(white)(white_draws))))
        self._check(result, "oracle_white_collapse", gap <= EXACT_TOL, f"max difference {gap:.3e}")

    def run_box3(self, config: ExperimentConfig, result: ScenarioResult) -> None:
        """Proportional-score pair: MCRB = nMCRB = sigma1^2 / N."""
        N, s1, s2 = config.N, config.sigma1_sq, config.sigma2_sq
        problem = box3_problem(N, s1, s2, config.theta0)
        solution = solve_pseudo_true(problem)
        theta_star = solution.theta_star
        info = info_analytic(problem, theta_star)
        report = bound_report(info)
        stream = RngStream(config.seed)
        draws = problem.sample(stream.child(0), max(config.n_probe, 2))
        fit = fit_proportional_score(
            problem.true_model.score(draws, problem.theta0), problem.assumed_model.score(draws, theta_star)
        )
        mml = run_trials(problem, mml_estimator(problem), theta_star, info, config.n_trials, stream.child(1), config.batch_size)
        mcrb, nmcrb, crb = _scalar(report.mcrb), _scalar(report.nmcrb), _scalar(report.crb)
        row = {
            "N": N,
            "sigma1_sq": s1,
            "sigma2_sq": s2,
            "mcrb": mcrb,
            "nmcrb": nmcrb,
            "crb": crb,
            "w_fit": _scalar(fit.w_matrix),
            "fit_residual": fit.max_residual,
            "mse_mml": _scalar(mml.empirical_mse.value),
            "se_mml": _scalar(mml.empirical_mse.std_error),
        }
        result.tables["box3"] = ResultTable("box3", pd.DataFrame([row]))
        expected = s1 / N
        self._check(
            result,
            "mcrb_equals_nmcrb",
            abs(mcrb - expected) <= EXACT_TOL and abs(nmcrb - expected) <= EXACT_TOL and abs(crb - expected) <= EXACT_TOL,
            f"MCRB={mcrb:.17g} nMCRB={nmcrb:.17g} CRB={crb:.17g}",
        )
        passed, detail = check_proportional_score(fit, s1 / s2)
        self._check(result, "proportional_score", passed, detail)
        self._check(result, "pseudo_true_is_true_parameter", abs(_scalar(theta_star) - config.theta0) <= 1e-10)
        jac = _scalar(pseudo_true_jacobian(problem, theta_star, info))
        self._check(result, "pseudo_true_jacobian", abs(jac - 1.0) <= 1e-8, f"{jac:.17g}")
        probe = draws
        gap = float(np.max(np.abs(efficient_estimator_map(info, theta_star, problem.assumed_model)(probe)[:, 0] - probe.mean(axis=1))))
        self._check(result, "efficient_map_is_sample_mean", gap <= EXACT_TOL, f"max difference {gap:.3e}")
        self._check(result, "zero_order_gap", abs(report.min_gap_eig) <= EXACT_TOL, f"{report.min_gap_eig:.3e}")
        self._check(
            result,
            "mml_attains_mcrb",
            abs(row["mse_mml"] - mcrb) <= MSE_Z * row["se_mml"],
            f"{row['mse_mml']:.6g} +- {row['se_mml']:.2g} vs {mcrb:.6g}",
        )

    def run_box4(self, config: ExperimentConfig, result: ScenarioResult) -> None:
        """Properties of equivalent models built from each configured g-function."""
        problem = box1_problem(config.N, config.sigma2, config.epsilon, config.theta0)
        theta_star = solve_pseudo_true(problem).theta_star
        info = info_analytic(problem, theta_star)
        mcrb = _scalar(bound_report(info).mcrb)
        z = config.z_threshold
        mml = run_trials(
            problem,
            mml_estimator(problem),
            theta_star,
            info,
            config.n_trials,
            RngStream(config.seed, stream_id=len(config.g_functions)),
            config.batch_size,
        )

        def g_point(index, name):
            gfun = g_function(name)
            model = EquivalentModel(problem, gfun, theta_star)
            stream = RngStream(config.seed, stream_id=index)
            base_c = model.normalizer(theta_star)
            draws = problem.sample(stream.child(0), CHECK_DRAWS)
            equivalence_residual = float(
                np.max(np.abs(model.log_pdf_equivalent(draws, theta_star, 1.0) - problem.true_model.log_pdf(draws, problem.theta0)))
            )
            fit = verify_proportional_score(model, config.n_probe, stream.child(1))
            normalization = [
                normalization_residual(model, theta_star + delta, config.mc_samples, stream.child(2 + k), config.batch_size)
                for k, delta in enumerate((-0.3, 0.2))
            ]
            solve_rng = stream.child(5)
            equivalent_solution = solve_pseudo_true(
                model.as_problem(), mc_samples=config.mc_samples, rng=solve_rng, force_monte_carlo=True
            )
            base_solution = solve_pseudo_true(problem, mc_samples=config.mc_samples, rng=solve_rng, force_monte_carlo=True)
            nmcrb = naive_mcrb_through_equivalent(model, config.mc_samples, stream.child(6), batch_size=config.batch_size)
            return {
                "gfun": gfun,
                "model": model,
                "base_c": base_c,
                "equivalence_residual": equivalence_residual,
                "fit": fit,
                "normalization_z": max(max_z(n, 1.0) for n in normalization),
                "equivalent_theta": _scalar(equivalent_solution.theta_star),
                "base_theta": _scalar(base_solution.theta_star),
                "nmcrb": nmcrb,
                "equivalent_local_z": unbiasedness_z(mml, "equivalent_local"),
            }

        points = self._map_points(g_point, config.g_functions, config.workers)
        rows = []
        for p in points:
            name = p["gfun"].name
            expected_w = 1.0 / p["gfun"].g_prime_at_one
            rows.append(
                {
                    "g": name,
                    "g_prime_at_one": p["gfun"].g_prime_at_one,
                    "c_at_base": float(p["base_c"].value),
                    "equivalence_max_residual": p["equivalence_residual"],
                    "w_fit": _scalar(p["fit"].w_matrix),
                    "w_expected": expected_w,
                    "fit_residual": p["fit"].max_residual,
                    "normalization_max_z": p["normalization_z"],
                    "equivalent_theta_star": p["equivalent_theta"],
                    "base_theta_star": p["base_theta"],
                    "nmcrb_equivalent": _scalar(p["nmcrb"].value),
                    "nmcrb_se": _scalar(p["nmcrb"].std_error),
                    "mcrb": mcrb,
                    "equivalent_local_z": p["equivalent_local_z"],
                }
            )
            self._check(
                result,
                f"{name}.normalizer_at_base",
                float(p["base_c"].value) == 1.0 and float(p["base_c"].std_error) == 0.0,
            )
            residual = p["equivalence_residual"]
            self._check(result, f"{name}.pointwise_equivalence", residual == 0.0, f"max residual {residual:.3e}")
            passed, detail = check_proportional_score(p["fit"], expected_w * np.eye(problem.assumed_model.param_dim))
            self._check(result, f"{name}.proportional_score", passed, detail)
            self._check(result, f"{name}.valid_density", p["normalization_z"] <= z, f"max z {p['normalization_z']:.2f}")
            solve_noise = np.sqrt(mcrb / config.mc_samples)
            self._check(
                result,
                f"{name}.pseudo_true_invariance",
                abs(p["equivalent_theta"] - p["base_theta"]) <= 1e-10
                and abs(p["equivalent_theta"] - _scalar(theta_star)) <= z * solve_noise,
                f"{p['equivalent_theta']:.12g} vs {p['base_theta']:.12g} vs {_scalar(theta_star):.12g}",
            )
            self._check(
                result,
                f"{name}.naive_mcrb_is_mcrb",
                max_z(p["nmcrb"], mcrb) <= z,
                f"{_scalar(p['nmcrb'].value):.6g} +- {_scalar(p['nmcrb'].std_error):.2g} vs {mcrb:.6g}",
            )
            self._check(
                result, f"{name}.mml_equivalent_local_unbiased", p["equivalent_local_z"] <= z, f"z={p['equivalent_local_z']:.2f}"
            )
        columns = [
            "g", "g_prime_at_one", "c_at_base", "equivalence_max_residual", "w_fit", "w_expected", "fit_residual",
            "normalization_max_z", "equivalent_theta_star", "base_theta_star", "nmcrb_equivalent", "nmcrb_se", "mcrb",
            "equivalent_local_z",
        ]
        result.tables["box4"] = ResultTable("box4", pd.DataFrame(rows, columns=columns))
        if "identity" in config.g_functions:
            self._identity_tilt_checks(config, result)

    def _identity_tilt_checks(self, config: ExperimentConfig, result: ScenarioResult) -> None:
        """With g(z) = z and one observation, p~ is N(theta0 + delta eps / sigma2, eps)."""
        s2, eps, theta0 = config.sigma2, config.epsilon, config.theta0
        problem = box1_problem(1, s2, eps, theta0)
        model = EquivalentModel(problem, g_function("identity"), [theta0])
        stream = RngStream(config.seed, stream_id=len(config.g_functions) + 1)
        worst_z, worst_density = 0.0, 0.0
        probes = theta0 + np.array([-1.0, -0.5, 0.0, 0.5, 1.0])[:, None]
        for k, delta in enumerate((0.5, -0.5)):
            c = model.normalizer([theta0 + delta], config.mc_samples, stream.child(k), config.batch_size)
            closed = np.exp(-(delta**2) / (2 * s2) + delta**2 * eps / (2 * s2**2))
            worst_z = max(worst_z, max_z(c, closed))
            shifted = theta0 + delta * eps / s2
            tilted = -0.5 * np.log(2 * np.pi * eps) - (probes[:, 0] - shifted) ** 2 / (2 * eps)
            density = model.log_pdf_equivalent(probes, [theta0 + delta], closed)
            worst_density = max(worst_density, float(np.max(np.abs(density - tilted))))
        self._check(result, "identity.normalizer_closed_form", worst_z <= config.z_threshold, f"max z {worst_z:.2f}")
        self._check(result, "identity.tilted_density", worst_density <= 1e-12, f"max deviation {worst_density:.3e}")

    def run_doa_sweep(self, config: ExperimentConfig, result: ScenarioResult) -> None:
        """MML and oracle ML against the bounds as the noise correlation grows."""
        z = config.z_threshold

        def rho_point(index, rho):
            problem = doa_problem(config.M, config.sigma2, rho, config.phi, config.s)
            theta_star = solve_pseudo_true(problem).theta_star
            info = info_analytic(problem, theta_star)
            report = bound_report(info)
            stream = RngStream(config.seed, stream_id=index)
            mml = run_trials(problem, mml_estimator(problem), theta_star, info, config.n_trials, stream.child(0), config.batch_size)
            oracle = run_trials(
                problem, oracle_ml_estimator(problem), theta_star, info, config.n_trials, stream.child(1), config.batch_size
            )
            paired = paired_score_bias(
                problem,
                oracle_ml_estimator(problem),
                mml_estimator(problem),
                theta_star,
                config.n_trials,
                stream.child(2),
                config.batch_size,
            )
            return {
                "rho": rho,
                "problem": problem,
                "theta_star": theta_star,
                "info": info,
                "report": report,
                "mml": mml,
                "oracle": oracle,
                "paired": paired,
                "jacobian": pseudo_true_jacobian(problem, theta_star, info),
                "jacobian_fd": pseudo_true_jacobian_fd(problem, theta_star),
            }

        points = self._map_points(rho_point, config.rho, config.workers)
        rows = []
        for p in points:
            report, mml, oracle = p["report"], p["mml"], p["oracle"]
            rows.append(
                {
                    "rho": p["rho"],
                    "rmse_phi_mml": float(mml.rmse()[0]),
                    "rmse_phi_oracle": float(oracle.rmse()[0]),
                    "mcrb_phi": float(np.sqrt(report.mcrb[0, 0])),
                    "nmcrb_phi": float(np.sqrt(report.nmcrb[0, 0])),
                    "crb_phi": float(np.sqrt(report.crb[0, 0])),
                    "rmse_sr_mml": float(mml.rmse()[1]),
                    "rmse_si_mml": float(mml.rmse()[2]),
                    "mcrb_sr": float(np.sqrt(report.mcrb[1, 1])),
                    "mcrb_si": float(np.sqrt(report.mcrb[2, 2])),
                    "score_bias_mml": float(np.linalg.norm(mml.score_bias.value)),
                    "score_bias_oracle": float(np.linalg.norm(oracle.score_bias.value)),
                    "score_bias_z_mml": max_z(mml.score_bias),
                    "score_bias_z_oracle": max_z(oracle.score_bias),
                    "paired_score_bias_z": max_z(p["paired"]),
                    "se_mse_phi_mml": float(mml.empirical_mse.std_error[0, 0]),
                    "se_mse_phi_oracle": float(oracle.empirical_mse.std_error[0, 0]),
                    "excluded_mml": mml.n_excluded,
                    "excluded_oracle": oracle.n_excluded,
                }
            )
        columns = [
            "rho",
            "rmse_phi_mml",
            "rmse_phi_oracle",
            "mcrb_phi",
            "nmcrb_phi",
            "crb_phi",
            "rmse_sr_mml",
            "rmse_si_mml",
            "mcrb_sr",
            "mcrb_si",
            "score_bias_mml",
            "score_bias_oracle",
            "score_bias_z_mml",
            "score_bias_z_oracle",
            "paired_score_bias_z",
            "se_mse_phi_mml",
            "se_mse_phi_oracle",
            "excluded_mml",
            "excluded_oracle",
        ]
        result.tables["doa_sweep"] = ResultTable("doa_sweep", pd.DataFrame(rows, columns=columns))

        for p in points:
            tag = f"rho={p['rho']:g}"
            report, mml, oracle, info = p["report"], p["mml"], p["oracle"], p["info"]
            self._check(result, f"{tag}.order_relation", report.order_ok, f"min gap {report.min_gap_eig:.3e}")
            self._check(result, f"{tag}.ensembles_valid", mml.valid and oracle.valid, f"{mml.n_excluded}/{oracle.n_excluded} excluded")
            dev = float(np.max(np.abs(p["theta_star"] - p["problem"].theta0)))
            self._check(result, f"{tag}.pseudo_true_is_true_parameter", dev <= 1e-8, f"max deviation {dev:.3e}")
            identity = np.eye(p["theta_star"].size)
            err, err_fd = _rel_err(p["jacobian"], identity), _rel_err(p["jacobian_fd"], identity)
            self._check(
                result,
                f"{tag}.pseudo_true_jacobian_identity",
                err <= 1e-8 and err_fd <= JACOBIAN_REL_TOL,
                f"relative error {err:.3e} analytic, {err_fd:.3e} finite difference",
            )
            self._check(
                result,
                f"{tag}.mml_revised_unbiased",
                check_unbiasedness(mml, "revised_local", z)["revised_local"],
                f"z={unbiasedness_z(mml, 'revised_local'):.2f}",
            )
            rmse = float(mml.rmse()[0])
            rmse_se = float(mml.empirical_mse.std_error[0, 0]) / (2 * rmse)
            bound = float(np.sqrt(report.mcrb[0, 0]))
            self._check(result, f"{tag}.mml_above_mcrb", rmse >= bound - MSE_Z * rmse_se, f"{rmse:.6g} vs {bound:.6g}")
            if p["rho"] == 0.0:
                dev = float(np.max(np.abs(report.mcrb - report.crb)))
                self._check(result, f"{tag}.mcrb_is_crb", dev < 1e-10, f"max deviation {dev:.3e}")
                dev = float(np.max(np.abs(info.A - info.B)) / np.max(np.abs(info.A)))
                self._check(result, f"{tag}.a_equals_b", dev <= EXACT_TOL, f"relative deviation {dev:.3e}")
                draws = p["problem"].sample(RngStream(config.seed, stream_id=len(config.rho) + 1), 200)
                gap = float(np.nanmax(np.abs(mml_estimator(p["problem"])(draws) - oracle_ml_estimator(p["problem"])(draws))))
                self._check(result, f"{tag}.oracle_is_mml", gap <= 1e-8, f"max difference {gap:.3e}")
            if p["rho"] >= 0.3:
                # oracle minus MML on shared draws
                pz = max_z(p["paired"])
                self._check(
                    result,
                    f"{tag}.oracle_score_biased",
                    pz > z,
                    f"paired z={pz:.2f}, oracle alone z={max_z(oracle.score_bias):.2f}",
                )
        crossing = [p["rho"] for p in points if p["oracle"].empirical_mse.value[0, 0] < p["report"].mcrb[0, 0]]
        self._check(result, "oracle_crosses_mcrb", bool(crossing), f"rho values {crossing}")

        problem = doa_problem(config.M, config.sigma2, config.jacobian_rho, config.phi, config.s)
        theta_star = solve_pseudo_true(problem).theta_star
        info = info_analytic(problem, theta_star)
        stream = RngStream(config.seed, stream_id=len(config.rho) + 2)
        jac = pseudo_true_jacobian(problem, theta_star, info)
        jac_fd = pseudo_true_jacobian_fd(
            problem, theta_star, mc_samples=config.jacobian_mc_samples, rng=stream.child(0), force_monte_carlo=True
        )
        err = _rel_err(jac_fd, jac)
        self._check(result, "pseudo_true_jacobian", err <= JACOBIAN_REL_TOL, f"relative error {err:.3e}")
        info_mc = info_monte_carlo(problem, theta_star, config.mc_samples, stream.child(1), config.batch_size, config.workers)
        worst = max(
            max_z(MonteCarloEstimate(getattr(info_mc, name), getattr(info_mc, f"{name}_se"), info_mc.n_samples), getattr(info, name))
            for name in ("A", "B", "B_pf", "J_p")
        )
        self._check(result, "information_monte_carlo", worst <= z, f"max z {worst:.2f}")

    def run_random_order_check(self, config: ExperimentConfig, result: ScenarioResult) -> None:
        """Loewner order of MCRB over naive MCRB on random Gaussian problems."""

        def random_point(index, _):
            stream = RngStream(config.seed, stream_id=index)
            gen = stream.child(0).generator()
            N = int(gen.integers(2, 13))
            problem = random_white_problem(N, stream.child(1))
            theta_star = solve_pseudo_true(problem).theta_star
            info = info_analytic(problem, theta_star)
            report = bound_report(info)
            cs_ok, cs_gap = self.order_checker.cauchy_schwarz(info)

            k = min(2, N)
            linear = linear_problem(
                gen.standard_normal((N, k)),
                random_spd(N, stream.child(2)),
                gen.standard_normal((N, k)),
                random_spd(N, stream.child(3)),
                gen.standard_normal(k),
            )
            linear_star = solve_pseudo_true(linear).theta_star
            linear_info = info_analytic(linear, linear_star)
            linear_report = bound_report(linear_info)
            jac_err = _rel_err(pseudo_true_jacobian_fd(linear, linear_star), pseudo_true_jacobian(linear, linear_star, linear_info))
            return {
                "problem": index,
                "N": N,
                "min_gap_eig": report.min_gap_eig,
                "cauchy_schwarz_gap": cs_gap,
                "linear_min_gap_eig": linear_report.min_gap_eig,
                "jacobian_rel_err": jac_err,
                "ok": report.order_ok and cs_ok and linear_report.order_ok,
            }

        rows = self._map_points(random_point, range(config.n_random_problems), config.workers)
        columns = ["problem", "N", "min_gap_eig", "cauchy_schwarz_gap", "linear_min_gap_eig", "jacobian_rel_err"]
        result.tables["random_order_check"] = ResultTable("random_order_check", pd.DataFrame(rows, columns=columns))
        failing = [r["problem"] for r in rows if not r["ok"]]
        self._check(result, "order_relation", not failing, f"failing problems {failing}")
        worst = max((r["jacobian_rel_err"] for r in rows), default=0.0)
        self._check(result, "pseudo_true_jacobian", worst <= 1e-6, f"max relative error {worst:.3e}")
