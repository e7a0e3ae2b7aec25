import logging

import numpy as np
from scipy import linalg

from misspec_bounds.densities import steering
from misspec_bounds.densities.density_model import DensityModel, MisspecifiedProblem
from misspec_bounds.densities.gaussian_model import LinearGaussianModel, SteeringGaussianModel
from misspec_bounds.errors import CapabilityError, InvalidInputError
from misspec_bounds.models.estimator import Estimator, Target
from misspec_bounds.models.information_set import InformationSet
from misspec_bounds.models.monte_carlo_estimate import MonteCarloEstimate
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.models.trial_ensemble import TrialEnsemble
from misspec_bounds.num_utils.accumulate import RunningMoments, run_batches
from misspec_bounds.num_utils.linalg import spd_factor, spd_solve

logger = logging.getLogger(__name__)

GRID_SIZE = 512
NEWTON_STEPS = 20
DERIVATIVE_TOL = 1e-10
MAX_EXCLUDED_FRACTION = 0.01
PSEUDO_TRUE_MATCH_TOL = 1e-8


def gls_map(model: LinearGaussianModel):
    """
    Maximum-likelihood map of a linear Gaussian model,
    x -> (H^T C^-1 H)^-1 H^T C^-1 x.
    """
    weights = model.solve(model.design)
    factor = spd_factor(model.design.T @ weights, "H^T C^-1 H")

    def estimate(x):
        x = np.asarray(x, dtype=float)
        return linalg.cho_solve(factor, (x @ weights).T).T

    return estimate


def grid_directions(size: int = GRID_SIZE) -> np.ndarray:
    """Cell centres of a regular grid over the open interval (-pi/2, pi/2)."""
    return -np.pi / 2 + np.pi * (np.arange(size) + 0.5) / size


def steering_ml_map(model: SteeringGaussianModel, grid_size: int = GRID_SIZE, max_newton: int = NEWTON_STEPS):
    """
    Maximum-likelihood map of a single-source array model with covariance C.

    phi maximizes |a^H C^-1 x|^2 / (a^H C^-1 a), found on a grid and refined by
    Newton steps on the derivative; s = a^H C^-1 x / (a^H C^-1 a) at that phi.
    Trials that leave the domain or do not converge come back as NaN.
    For white C the objective is proportional to |a^H x|^2 and s = a^H x / M.
    """
    M = model.M
    grid = grid_directions(grid_size)
    grid_vectors = steering.steering_vector(grid, M)
    grid_gain = np.real(np.sum(np.conj(grid_vectors) * model.solve(grid_vectors.T).T, axis=1))

    def estimate(x):
        batch, single = model.check_obs(x)
        y = model.solve(batch.T).T
        projections = np.conj(grid_vectors) @ y.T
        scores = np.abs(projections) ** 2 / grid_gain[:, None]
        phi = grid[np.argmax(scores, axis=0)]
        converged = np.zeros(phi.shape, dtype=bool)
        for _ in range(max_newton):
            active = ~converged
            if not np.any(active):
                break
            a = steering.steering_vector(phi[active], M)
            a1 = steering.steering_derivative(phi[active], M)
            a2 = steering.steering_second_derivative(phi[active], M)
            ya = y[active]
            u = np.sum(np.conj(a) * ya, axis=1)
            u1 = np.sum(np.conj(a1) * ya, axis=1)
            u2 = np.sum(np.conj(a2) * ya, axis=1)
            ca = model.solve(a.T).T
            q = np.real(np.sum(np.conj(a) * ca, axis=1))
            q1 = 2 * np.real(np.sum(np.conj(a1) * ca, axis=1))
            q2 = 2 * np.real(np.sum(np.conj(a2) * ca, axis=1)) + 2 * np.real(
                np.sum(np.conj(a1) * model.solve(a1.T).T, axis=1)
            )
            n0 = np.abs(u) ** 2
            n1 = 2 * np.real(np.conj(u) * u1)
            n2 = 2 * (np.abs(u1) ** 2 + np.real(np.conj(u) * u2))
            value = n0 / q
            d1 = (n1 * q - n0 * q1) / q**2
            d2 = (n2 * q - n0 * q2) / q**2 - 2 * q1 * (n1 * q - n0 * q1) / q**3
            done = np.abs(d1) <= DERIVATIVE_TOL * np.maximum(1.0, value)
            step = np.where(d2 < 0, -d1 / np.where(d2 < 0, d2, 1.0), 0.0)
            stalled = (d2 < 0) & (np.abs(step) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(phi[active])))
            idx = np.flatnonzero(active)
            converged[idx[done | stalled]] = True
            moving = idx[~(done | stalled)]
            phi[moving] = phi[moving] + step[~(done | stalled)]
            phi[moving[d2[~(done | stalled)] >= 0]] = np.nan
            phi[np.abs(phi) >= np.pi / 2] = np.nan
            converged[np.isnan(phi)] = True
        phi[~converged] = np.nan
        result = np.full((batch.shape[0], 3), np.nan)
        ok = np.isfinite(phi)
        a = steering.steering_vector(phi[ok], M)
        gain = np.real(np.sum(np.conj(a) * model.solve(a.T).T, axis=1))
        amplitude = np.sum(np.conj(a) * y[ok], axis=1) / gain
        result[ok] = np.column_stack([phi[ok], amplitude.real, amplitude.imag])
        return result[0] if single else result

    return estimate


def _ml_map(model: DensityModel):
    if isinstance(model, LinearGaussianModel):
        return gls_map(model)
    if isinstance(model, SteeringGaussianModel):
        return steering_ml_map(model)
    raise CapabilityError(f"No maximum-likelihood solver for {type(model).__name__}.")


def mml_estimator(problem: MisspecifiedProblem) -> Estimator:
    """Maximizer of the assumed likelihood f(x; theta)."""
    return Estimator("mml", _ml_map(problem.assumed_model), Target.PSEUDO_TRUE)


def oracle_ml_estimator(problem: MisspecifiedProblem) -> Estimator:
    """Maximizer of the true likelihood p(x; vartheta), which needs the true covariance."""
    return Estimator("oracle_ml", _ml_map(problem.true_model), Target.TRUE_PARAM)


def first_sample_estimator() -> Estimator:
    """x -> x_1, for real scalar-parameter problems."""

    def estimate(x):
        if np.iscomplexobj(x):
            raise InvalidInputError("x_1 estimates a real scalar parameter; observations are complex.")
        x = np.asarray(x, dtype=float)
        return x[..., :1].copy()

    return Estimator("x1", estimate, Target.PSEUDO_TRUE)


def score_at_estimates(model: DensityModel, x, estimates) -> np.ndarray:
    """score_f(x_i; estimate_i) for every retained trial."""
    x = np.asarray(x)
    estimates = np.atleast_2d(estimates)
    if isinstance(model, LinearGaussianModel):
        residual = x - estimates @ model.design.T
        return model.solve(residual.T).T @ model.design
    return np.stack([model.score(xi, ti) for xi, ti in zip(x, estimates)]) if len(x) else np.zeros((0, model.param_dim))


def run_trials(
    problem: MisspecifiedProblem,
    estimator: Estimator,
    theta_star,
    info: InformationSet,
    n_trials: int,
    rng: RngStream,
    batch_size: int = 2000,
    workers: int = 1,
) -> TrialEnsemble:
    """
    Applies an estimator to n_trials draws from p(x; theta0) and accumulates
    the empirical MSE about theta*, the regular bias, the score bias against
    A^-1 B and the true-score bias against A^-1 B_pf.

    Estimates that are not finite are excluded and counted; more than 1%
    excluded marks the ensemble invalid.

    Raises:
        InvalidInputError: If n_trials < 2, the estimator does not return one
            value per assumed parameter, or a true-parameter estimator is run
            where theta* differs from theta0.
        CapabilityError: If p cannot be sampled.
    """
    if n_trials < 2:
        raise InvalidInputError("n_trials must be at least 2.")
    true, assumed = problem.true_model, problem.assumed_model
    if not true.can_sample:
        raise CapabilityError(f"{true.name} cannot be sampled.")
    theta_star = assumed.check_params(theta_star)
    if estimator.target is Target.TRUE_PARAM and (
        problem.theta0.shape != theta_star.shape
        or not np.allclose(problem.theta0, theta_star, rtol=0, atol=PSEUDO_TRUE_MATCH_TOL)
    ):
        raise InvalidInputError(
            f"{estimator.name} estimates the true parameter but theta*={theta_star} differs from theta0={problem.theta0}."
        )
    score_target = np.atleast_2d(spd_solve(info.A, info.B, "A"))
    true_score_target = np.atleast_2d(spd_solve(info.A, info.B_pf, "A"))

    def batch(stream: RngStream, size: int):
        x = problem.sample(stream, size)
        estimates = np.atleast_2d(estimator(x)).reshape(size, -1)
        if estimates.shape[1] != assumed.param_dim:
            raise InvalidInputError(
                f"{estimator.name} returns {estimates.shape[1]} parameters, the assumed model has {assumed.param_dim}."
            )
        keep = np.all(np.isfinite(estimates), axis=1)
        x, estimates = x[keep], estimates[keep]
        err = estimates - theta_star
        score_f = np.atleast_2d(assumed.score(x, theta_star)).reshape(len(x), -1)
        score_p = np.atleast_2d(true.score(x, problem.theta0)).reshape(len(x), -1)
        at_estimate = score_at_estimates(assumed, x, estimates)
        max_norm = float(np.max(np.linalg.norm(at_estimate, axis=1))) if len(x) else 0.0
        return (
            estimates,
            int(size - keep.sum()),
            max_norm,
            RunningMoments.of(err),
            RunningMoments.of(np.einsum("ni,nj->nij", err, err)),
            RunningMoments.of(np.einsum("ni,nj->nij", err, score_f)),
            RunningMoments.of(np.einsum("ni,nj->nij", err, score_p)),
        )

    parts = run_batches(batch, rng, n_trials, batch_size, workers)
    totals = [RunningMoments() for _ in range(4)]
    for part in parts:
        for total, moments in zip(totals, part[3:]):
            total.merge(moments)
    n_excluded = sum(p[1] for p in parts)
    valid = n_excluded <= MAX_EXCLUDED_FRACTION * n_trials
    if n_excluded:
        log = logger.info if valid else logger.warning
        log("%s on %s: %d of %d trials excluded", estimator.name, problem.name, n_excluded, n_trials)
    bias, mse, cross_f, cross_p = (t.estimate() for t in totals)
    return TrialEnsemble(
        estimator_name=estimator.name,
        estimates=np.concatenate([p[0] for p in parts]),
        empirical_mse=mse,
        regular_bias=bias,
        score_bias=MonteCarloEstimate(cross_f.value - score_target, cross_f.std_error, cross_f.n_samples),
        true_score_bias=MonteCarloEstimate(cross_p.value - true_score_target, cross_p.std_error, cross_p.n_samples),
        max_score_norm=max(p[2] for p in parts),
        n_trials=n_trials,
        n_excluded=n_excluded,
        seed=rng.seed,
        valid=valid,
    )


def paired_score_bias(
    problem: MisspecifiedProblem,
    estimator: Estimator,
    reference: Estimator,
    theta_star,
    n_trials: int,
    rng: RngStream,
    batch_size: int = 2000,
    workers: int = 1,
) -> MonteCarloEstimate:
    """
    E_p[(est - ref) score_f(x; theta*)^T] with both estimators applied to the
    same draws.

    This is the score bias of `estimator` minus that of `reference`. Both
    estimates share the first-order term A^-1 score_f, which cancels trial by
    trial, so the spread is that of est - ref alone. Trials where either
    estimate is not finite are dropped.

    Raises:
        InvalidInputError: If n_trials < 2 or the estimators disagree in size.
    """
    if n_trials < 2:
        raise InvalidInputError("n_trials must be at least 2.")
    assumed = problem.assumed_model
    theta_star = assumed.check_params(theta_star)

    def batch(stream: RngStream, size: int):
        x = problem.sample(stream, size)
        first = np.atleast_2d(estimator(x)).reshape(size, -1)
        second = np.atleast_2d(reference(x)).reshape(size, -1)
        if first.shape != second.shape or first.shape[1] != assumed.param_dim:
            raise InvalidInputError(f"{estimator.name} and {reference.name} must both return {assumed.param_dim} values.")
        keep = np.all(np.isfinite(first), axis=1) & np.all(np.isfinite(second), axis=1)
        score_f = np.atleast_2d(assumed.score(x[keep], theta_star)).reshape(int(keep.sum()), -1)
        return RunningMoments.of(np.einsum("ni,nj->nij", first[keep] - second[keep], score_f))

    total = RunningMoments()
    for part in run_batches(batch, rng, n_trials, batch_size, workers):
        total.merge(part)
    estimate = total.estimate()
    if estimate.n_samples < n_trials:
        dropped = n_trials - estimate.n_samples
        logger.info("%s vs %s: %d of %d paired trials dropped", estimator.name, reference.name, dropped, n_trials)
    return estimate
