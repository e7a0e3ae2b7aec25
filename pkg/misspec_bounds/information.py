import logging

import numpy as np

from misspec_bounds.densities.density_model import MisspecifiedProblem
from misspec_bounds.densities.gaussian_model import GaussianMeanModel
from misspec_bounds.errors import CapabilityError, InvalidInputError
from misspec_bounds.models.information_set import InformationSet
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.accumulate import RunningMoments, run_batches
from misspec_bounds.num_utils.linalg import symmetrize

logger = logging.getLogger(__name__)


def info_analytic(problem: MisspecifiedProblem, theta_star) -> InformationSet:
    """
    Closed-form A, B, B_pf and J_p for fixed-covariance Gaussian pairs.

    With D_f, D_p the mean Jacobians, C_f, C_p the covariances, kappa = 1 for
    real and 2 for complex data, and g = score_f(mu_p; theta*):
        A    = -hessian_f(mu_p; theta*)
        B    = kappa Re{D_f^H C_f^-1 C_p C_f^-1 D_f} + g g^T
        B_pf = kappa Re{D_f^H C_f^-1 D_p}
        J_p  = kappa Re{D_p^H C_p^-1 D_p}

    Raises:
        CapabilityError: If either model is not a fixed-covariance Gaussian.
    """
    true, assumed = problem.true_model, problem.assumed_model
    if not (isinstance(true, GaussianMeanModel) and isinstance(assumed, GaussianMeanModel)):
        raise CapabilityError(
            f"No closed-form information matrices for {type(true).__name__}/{type(assumed).__name__}."
        )
    theta_star = assumed.check_params(theta_star)
    theta0 = problem.theta0
    kappa = assumed.kappa
    mu_p = true.mean(theta0)
    d_f = assumed.mean_jacobian(theta_star)
    d_p = true.mean_jacobian(theta0)
    whitened_f = assumed.solve(d_f)

    drift = assumed.score(mu_p, theta_star)
    A = -assumed.hessian(mu_p, theta_star)
    B = kappa * np.real(np.conj(whitened_f).T @ true.cov @ whitened_f) + np.outer(drift, drift)
    B_pf = kappa * np.real(np.conj(whitened_f).T @ d_p)
    J_p = true.fisher_information(theta0)
    return InformationSet(A=symmetrize(A), B=symmetrize(B), B_pf=B_pf, J_p=symmetrize(J_p))


def info_monte_carlo(
    problem: MisspecifiedProblem,
    theta_star,
    n: int,
    rng: RngStream,
    batch_size: int = 2000,
    workers: int = 1,
) -> InformationSet:
    """
    Sample-average A, B, B_pf and J_p over n draws from p(x; theta0).

    Per-entry standard errors come from the per-sample variance of each
    matrix entry. Batches are reduced in stream order.

    Raises:
        CapabilityError: If the true model cannot be sampled.
        InvalidInputError: If n < 2.
    """
    if n < 2:
        raise InvalidInputError("At least two samples are needed.")
    true, assumed = problem.true_model, problem.assumed_model
    if not true.can_sample:
        raise CapabilityError(f"{true.name} cannot be sampled.")
    theta_star = assumed.check_params(theta_star)

    def batch(stream: RngStream, size: int):
        x = problem.sample(stream, size)
        score_f = np.atleast_2d(assumed.score(x, theta_star))
        score_p = np.atleast_2d(true.score(x, problem.theta0))
        neg_hess = -np.asarray(assumed.hessian(x, theta_star)).reshape(size, assumed.param_dim, assumed.param_dim)
        return (
            RunningMoments.of(neg_hess),
            RunningMoments.of(np.einsum("ni,nj->nij", score_f, score_f)),
            RunningMoments.of(np.einsum("ni,nj->nij", score_f, score_p)),
            RunningMoments.of(np.einsum("ni,nj->nij", score_p, score_p)),
        )

    totals = [RunningMoments() for _ in range(4)]
    for parts in run_batches(batch, rng, n, batch_size, workers):
        for total, part in zip(totals, parts):
            total.merge(part)
    A, B, B_pf, J_p = (t.estimate() for t in totals)
    logger.debug("Monte Carlo information for %s from %d samples", problem.name, n)
    return InformationSet(
        A=symmetrize(A.value),
        B=symmetrize(B.value),
        B_pf=B_pf.value,
        J_p=symmetrize(J_p.value),
        method="monte_carlo",
        A_se=A.std_error,
        B_se=B.std_error,
        B_pf_se=B_pf.std_error,
        J_p_se=J_p.std_error,
        n_samples=n,
    )
