import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from misspec_bounds.densities.density_model import MisspecifiedProblem
from misspec_bounds.densities.gaussian_model import GaussianMeanModel
from misspec_bounds.errors import ConditioningError, InvalidInputError
from misspec_bounds.models.information_set import InformationSet
from misspec_bounds.models.pseudo_true_solution import PseudoTrueSolution
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.accumulate import pairwise_sum
from misspec_bounds.num_utils.linalg import MAX_CONDITION, spd_solve, symmetrize

logger = logging.getLogger(__name__)

ANALYTIC_TOL = 1e-10
MONTE_CARLO_TOL = 1e-6
MAX_ITERATIONS = 100
MAX_HALVINGS = 40
GRID_POINTS = 32
DEFAULT_MC_SAMPLES = 100000

# value, gradient and Hessian of the objective at theta
Objective = Callable[[np.ndarray], Tuple[float, np.ndarray, np.ndarray]]


def has_exact_expectation(problem: MisspecifiedProblem) -> bool:
    """
    True when both models are fixed-covariance Gaussians on the same field, so
    E_p[log f], its gradient and Hessian have closed forms.
    """
    return (
        isinstance(problem.true_model, GaussianMeanModel)
        and isinstance(problem.assumed_model, GaussianMeanModel)
        and problem.true_model.is_complex == problem.assumed_model.is_complex
    )


def analytic_objective(problem: MisspecifiedProblem) -> Objective:
    """
    E_p[log f(x; theta)] for Gaussian pairs.

    With mu_p the true mean, the expectation is log f(mu_p; theta) minus
    c tr(C_f^-1 C_p), c = 1/2 for real and 1 for complex observations. Score
    and Hessian of f are affine in x, so their expectations are their values
    at mu_p.
    """
    true, assumed = problem.true_model, problem.assumed_model
    mu_p = true.mean(problem.theta0)
    trace_term = float(np.trace(assumed.solve(true.cov)))
    trace_term *= 1.0 if assumed.is_complex else 0.5

    def objective(theta):
        return (
            assumed.log_pdf(mu_p, theta) - trace_term,
            assumed.score(mu_p, theta),
            assumed.hessian(mu_p, theta),
        )

    return objective


def sample_average_objective(problem: MisspecifiedProblem, samples: np.ndarray) -> Objective:
    """Average of log f, score and Hessian over fixed draws from p."""
    assumed = problem.assumed_model
    n = samples.shape[0]

    def objective(theta):
        value = float(pairwise_sum(assumed.log_pdf(samples, theta)) / n)
        grad = np.asarray(pairwise_sum(assumed.score(samples, theta)) / n, dtype=float)
        hess = np.asarray(pairwise_sum(assumed.hessian(samples, theta)) / n, dtype=float)
        return value, grad, symmetrize(hess)

    return objective


def _ascent_direction(grad: np.ndarray, hess: np.ndarray) -> Tuple[np.ndarray, bool]:
    """
    Newton direction when -hess is positive definite, gradient otherwise.

    Raises:
        ConditioningError: If the Hessian is numerically singular.
    """
    eigs = np.linalg.eigvalsh(-hess)
    scale = max(np.max(np.abs(eigs)), np.finfo(float).tiny)
    if np.min(np.abs(eigs)) <= scale / MAX_CONDITION:
        raise ConditioningError(f"Objective Hessian is singular at the iterate (eigenvalues {eigs}).")
    if eigs[0] > 0:
        return spd_solve(-hess, grad, "negative Hessian"), True
    return grad / scale, False


def maximize(
    objective: Objective,
    theta_init,
    tol: float,
    in_domain: Callable[[np.ndarray], bool] = lambda t: True,
    max_iter: int = MAX_ITERATIONS,
) -> PseudoTrueSolution:
    """
    Damped Newton ascent with backtracking, falling back to gradient ascent
    where the Hessian is not negative definite.

    Non-convergence is reported through the converged flag.
    """
    theta = np.atleast_1d(np.asarray(theta_init, dtype=float)).copy()
    value, grad, hess = objective(theta)
    iterations = 0
    while np.linalg.norm(grad) > tol and iterations < max_iter:
        iterations += 1
        direction, newton = _ascent_direction(grad, hess)
        step = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = theta + step * direction
            if in_domain(candidate):
                cand_value, cand_grad, cand_hess = objective(candidate)
                if cand_value >= value - 1e-14 * max(1.0, abs(value)):
                    break
            step *= 0.5
        else:
            logger.debug("Line search stalled at %s after %d iterations", theta, iterations)
            break
        theta, value, grad, hess = candidate, cand_value, cand_grad, cand_hess
        logger.debug("iter %d newton=%s step=%g |grad|=%.3e", iterations, newton, step, np.linalg.norm(grad))
    gnorm = float(np.linalg.norm(grad))
    return PseudoTrueSolution(
        theta_star=theta,
        objective_value=float(value),
        converged=gnorm <= tol,
        iterations=iterations,
        gradient_norm=gnorm,
    )


def grid_prescan(
    objective: Objective,
    box: Sequence[Tuple[float, float]],
    points: int = GRID_POINTS,
    in_domain: Callable[[np.ndarray], bool] = lambda t: True,
    workers: int = 1,
) -> np.ndarray:
    """
    Best point of a regular grid with `points` values per dimension over box.
    """
    axes = [np.linspace(lo, hi, points) for lo, hi in box]
    candidates = [np.array(p) for p in itertools.product(*axes)]
    candidates = [c for c in candidates if in_domain(c)]
    if not candidates:
        raise InvalidInputError("Grid box contains no point of the parameter domain.")

    def evaluate(c):
        return objective(c)[0]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        values = list(executor.map(evaluate, candidates))
    return candidates[int(np.argmax(values))]


def solve_pseudo_true(
    problem: MisspecifiedProblem,
    theta_init=None,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    rng: Optional[RngStream] = None,
    force_monte_carlo: bool = False,
    grid_box: Optional[Sequence[Tuple[float, float]]] = None,
    grid_points: int = GRID_POINTS,
    tol: Optional[float] = None,
    workers: int = 1,
) -> PseudoTrueSolution:
    """
    Maximizes E_p[log f(x; theta)] at the problem's true parameter.

    Gaussian pairs use the exact expectation unless force_monte_carlo is set;
    everything else replaces the expectation by an average over mc_samples
    draws from p taken from rng.

    Parameters:
        problem (MisspecifiedProblem): The (p, f, theta0) triple.
        theta_init (array_like, optional): Starting point; defaults to theta0
            when the dimensions agree, else zeros.
        mc_samples (int): Draws for the sample-average objective.
        rng (RngStream, optional): Stream for the draws; required on that path.
        force_monte_carlo (bool): Use the sample average even when exact.
        grid_box (sequence of (lo, hi), optional): Enables a coarse grid
            pre-scan whose best point is solved from as well.
        grid_points (int): Grid values per dimension.
        tol (float, optional): Gradient-norm tolerance; 1e-10 analytic,
            1e-6 sample average by default.
        workers (int): Threads for the grid pre-scan.

    Returns:
        PseudoTrueSolution: The maximizer and convergence diagnostics.

    Raises:
        ConditioningError: If the objective Hessian is singular at an iterate.
        CapabilityError: If sampling is needed but p cannot be sampled.
    """
    assumed = problem.assumed_model
    if theta_init is None:
        theta_init = problem.theta0 if problem.theta0.size == assumed.param_dim else np.zeros(assumed.param_dim)
    theta_init = assumed.check_params(theta_init)

    if has_exact_expectation(problem) and not force_monte_carlo:
        objective, method = analytic_objective(problem), "analytic"
        tol = ANALYTIC_TOL if tol is None else tol
    else:
        if mc_samples < 1:
            raise InvalidInputError("mc_samples must be at least 1.")
        if rng is None:
            raise InvalidInputError("A random stream is required for the sample-average objective.")
        samples = problem.sample(rng, mc_samples)
        objective, method = sample_average_objective(problem, samples), "monte_carlo"
        tol = MONTE_CARLO_TOL if tol is None else tol

    solution = maximize(objective, theta_init, tol, assumed.in_domain)
    if grid_box is not None:
        start = grid_prescan(objective, grid_box, grid_points, assumed.in_domain, workers)
        from_grid = maximize(objective, start, tol, assumed.in_domain)
        if np.max(np.abs(from_grid.theta_star - solution.theta_star)) > np.sqrt(tol):
            logger.warning(
                "Grid pre-scan and initial point disagree on %s: %s (%.12g) vs %s (%.12g)",
                problem.name,
                from_grid.theta_star,
                from_grid.objective_value,
                solution.theta_star,
                solution.objective_value,
            )
            if from_grid.objective_value > solution.objective_value:
                solution = from_grid
    if not solution.converged:
        logger.warning(
            "Pseudo-true solve for %s stopped at |grad|=%.3e after %d iterations",
            problem.name,
            solution.gradient_norm,
            solution.iterations,
        )
    return PseudoTrueSolution(
        theta_star=solution.theta_star,
        objective_value=solution.objective_value,
        converged=solution.converged,
        iterations=solution.iterations,
        gradient_norm=solution.gradient_norm,
        method=method,
    )


def pseudo_true_jacobian(problem: MisspecifiedProblem, theta_star, info: InformationSet) -> np.ndarray:
    """
    d theta* / d vartheta = A^-1 B_pf, an N2 x N1 matrix.

    Raises:
        ConditioningError: If A is singular or ill-conditioned.
    """
    expected = (problem.assumed_model.param_dim, problem.true_model.param_dim)
    if info.B_pf.shape != expected:
        raise InvalidInputError(f"B_pf has shape {info.B_pf.shape}, expected {expected}.")
    return np.atleast_2d(spd_solve(info.A, info.B_pf, "A"))


def pseudo_true_jacobian_fd(
    problem: MisspecifiedProblem,
    theta_star,
    h: float = 1e-4,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    rng: Optional[RngStream] = None,
    force_monte_carlo: bool = False,
    tol: float = ANALYTIC_TOL,
) -> np.ndarray:
    """
    Central finite difference of theta*(vartheta) around the problem's theta0.

    Every perturbed solve reuses the same stream, so on the sample-average
    path the draws are common random numbers.
    """
    theta0 = problem.theta0
    columns = []
    for j in range(theta0.size):
        e = np.zeros_like(theta0)
        e[j] = h
        solved = []
        for sign in (1.0, -1.0):
            perturbed = problem.with_theta0(theta0 + sign * e)
            solution = solve_pseudo_true(
                perturbed, theta_star, mc_samples, rng, force_monte_carlo=force_monte_carlo, tol=tol
            )
            if not solution.converged:
                logger.warning("Perturbed pseudo-true solve did not converge (coordinate %d)", j)
            solved.append(solution.theta_star)
        columns.append((solved[0] - solved[1]) / (2 * h))
    return np.stack(columns, axis=1)
