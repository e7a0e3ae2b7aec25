"""
Built-in true/assumed model families and the problems assembled from them.
"""
from typing import Callable, Dict

import numpy as np

from misspec_bounds.densities.density_model import DensityModel, MisspecifiedProblem
from misspec_bounds.densities.gaussian_model import LinearGaussianModel, SteeringGaussianModel
from misspec_bounds.densities.steering import toeplitz_covariance
from misspec_bounds.errors import InvalidInputError
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.sampling import random_spd


def _positive(**values):
    for key, value in values.items():
        if not value > 0:
            raise InvalidInputError(f"{key} must be positive, got {value}.")


def box1_true(N: int, sigma2: float, epsilon: float) -> LinearGaussianModel:
    """x ~ N(theta 1, diag(epsilon, sigma2, ..., sigma2))."""
    _positive(N=N, sigma2=sigma2, epsilon=epsilon)
    variances = np.full(N, float(sigma2))
    variances[0] = epsilon
    return LinearGaussianModel.constant_mean(np.diag(variances), name="box1_true")


def box1_assumed(N: int, sigma2: float) -> LinearGaussianModel:
    """x ~ N(theta 1, sigma2 I)."""
    _positive(N=N, sigma2=sigma2)
    return LinearGaussianModel.constant_mean(sigma2 * np.eye(N), name="box1_assumed")


def box3_true(N: int, sigma1_sq: float) -> LinearGaussianModel:
    _positive(N=N, sigma1_sq=sigma1_sq)
    return LinearGaussianModel.constant_mean(sigma1_sq * np.eye(N), name="box3_true")


def box3_assumed(N: int, sigma2_sq: float) -> LinearGaussianModel:
    _positive(N=N, sigma2_sq=sigma2_sq)
    return LinearGaussianModel.constant_mean(sigma2_sq * np.eye(N), name="box3_assumed")


def doa_true(M: int, sigma2: float, rho: float) -> SteeringGaussianModel:
    """Single source in spatially coloured noise, Sigma_ij = sigma2 rho^|i-j|."""
    _positive(sigma2=sigma2)
    return SteeringGaussianModel(M, toeplitz_covariance(M, sigma2, rho), name="doa_true")


def doa_assumed(M: int, sigma2: float) -> SteeringGaussianModel:
    """Single source in white noise of the true diagonal variance."""
    _positive(sigma2=sigma2)
    return SteeringGaussianModel(M, sigma2 * np.eye(M), name="doa_assumed")


def box1_problem(N: int, sigma2: float, epsilon: float, theta0: float = 0.0) -> MisspecifiedProblem:
    return MisspecifiedProblem(
        box1_true(N, sigma2, epsilon), box1_assumed(N, sigma2), np.array([theta0]), name="box1"
    )


def box3_problem(N: int, sigma1_sq: float, sigma2_sq: float, theta0: float = 0.0) -> MisspecifiedProblem:
    return MisspecifiedProblem(
        box3_true(N, sigma1_sq), box3_assumed(N, sigma2_sq), np.array([theta0]), name="box3"
    )


def doa_problem(M: int, sigma2: float, rho: float, phi: float, s: complex) -> MisspecifiedProblem:
    theta0 = np.array([phi, np.real(s), np.imag(s)], dtype=float)
    return MisspecifiedProblem(doa_true(M, sigma2, rho), doa_assumed(M, sigma2), theta0, name=f"doa_rho{rho:g}")


def random_white_problem(N: int, rng: RngStream, theta0: float = 0.0) -> MisspecifiedProblem:
    """
    Constant-mean problem with a random positive definite true covariance and
    a white assumed covariance of the same average variance.
    """
    cov = random_spd(N, rng)
    assumed = LinearGaussianModel.constant_mean(np.trace(cov) / N * np.eye(N), name="white_assumed")
    true = LinearGaussianModel.constant_mean(cov, name="random_true")
    return MisspecifiedProblem(true, assumed, np.array([theta0]), name=f"random_N{N}")


def correctly_specified(model: DensityModel, theta0) -> MisspecifiedProblem:
    """Pairs a model with itself."""
    return MisspecifiedProblem(model, model, np.asarray(theta0, dtype=float), name=f"{model.name}_self")


MODEL_BUILDERS: Dict[str, Callable[..., DensityModel]] = {
    "box1_true": box1_true,
    "box1_assumed": box1_assumed,
    "box3_true": box3_true,
    "box3_assumed": box3_assumed,
    "doa_true": doa_true,
    "doa_assumed": doa_assumed,
}


def build_model(name: str, **kwargs) -> DensityModel:
    try:
        builder = MODEL_BUILDERS[name]
    except KeyError:
        raise InvalidInputError(f"Unknown model '{name}'. Known: {sorted(MODEL_BUILDERS)}.") from None
    return builder(**kwargs)


def linear_problem(true_design, true_cov, assumed_design, assumed_cov, theta0) -> MisspecifiedProblem:
    """
    General linear-Gaussian pair; the designs may differ, in which case the
    pseudo-true parameter moves away from theta0.
    """
    return MisspecifiedProblem(
        LinearGaussianModel(true_design, true_cov, name="linear_true"),
        LinearGaussianModel(assumed_design, assumed_cov, name="linear_assumed"),
        np.atleast_1d(np.asarray(theta0, dtype=float)),
        name="linear",
    )
