import logging
from abc import abstractmethod
from typing import Optional

import numpy as np
from scipy import linalg

from misspec_bounds.densities import steering
from misspec_bounds.densities.density_model import DensityModel
from misspec_bounds.errors import InvalidInputError
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.linalg import cholesky_lower
from misspec_bounds.num_utils.sampling import sample_complex_gaussian, sample_gaussian

logger = logging.getLogger(__name__)


class GaussianMeanModel(DensityModel):
    """
    Gaussian density with a parameter-dependent mean and a fixed covariance.

    Real models are N(mu(theta), C); complex models are circularly symmetric
    CN(mu(theta), C) with a real symmetric C. With kappa = 1 (real) or 2
    (complex), the score is kappa Re{D^H C^-1 (x - mu)} and the Hessian is
    kappa Re{sum_n conj(d2mu_n) [C^-1 (x - mu)]_n - D^H C^-1 D}, where D is
    the mean Jacobian. Both are affine in x, so their expectations under any
    distribution depend on it only through its mean.
    """

    can_sample = True
    has_analytic_score = True
    has_analytic_hessian = True

    def __init__(self, param_dim: int, cov, is_complex: bool = False, name: str = "gaussian"):
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        super().__init__(param_dim, cov.shape[0])
        if cov.shape != (self.obs_dim, self.obs_dim) or not np.allclose(cov, cov.T, rtol=1e-12, atol=0):
            raise InvalidInputError(f"Covariance of {name} must be symmetric, got shape {cov.shape}.")
        self.name = name
        self.is_complex = is_complex
        self.cov = cov
        self._chol = cholesky_lower(cov)
        self._logdet = 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    @property
    def kappa(self) -> float:
        return 2.0 if self.is_complex else 1.0

    @abstractmethod
    def mean(self, params) -> np.ndarray:
        """Mean vector, length N."""

    @abstractmethod
    def mean_jacobian(self, params) -> np.ndarray:
        """d mu / d params, N x k."""

    @abstractmethod
    def mean_second(self, params) -> np.ndarray:
        """d2 mu / d params d params, N x k x k."""

    def solve(self, b) -> np.ndarray:
        """
        C^-1 b for b of shape (N,) or (N, m), real or complex, via the Cholesky factor.
        """
        b = np.asarray(b)
        factor = (self._chol, True)
        if np.iscomplexobj(b):
            return linalg.cho_solve(factor, b.real) + 1j * linalg.cho_solve(factor, b.imag)
        return linalg.cho_solve(factor, b)

    def _whitened_residual(self, x, params):
        batch, single = self.check_obs(x)
        params = self.check_params(params)
        residual = batch - self.mean(params)
        return residual, self.solve(residual.T).T, single, params

    def log_pdf(self, x, params):
        residual, weighted, single, _ = self._whitened_residual(x, params)
        quad = np.real(np.sum(np.conj(residual) * weighted, axis=1))
        if self.is_complex:
            value = -(self.obs_dim * np.log(np.pi) + self._logdet + quad)
        else:
            value = -0.5 * (self.obs_dim * np.log(2 * np.pi) + self._logdet + quad)
        return float(value[0]) if single else value

    def score(self, x, params) -> np.ndarray:
        _, weighted, single, params = self._whitened_residual(x, params)
        value = self.kappa * np.real(weighted @ np.conj(self.mean_jacobian(params)))
        return value[0] if single else value

    def fisher_information(self, params) -> np.ndarray:
        """kappa Re{D^H C^-1 D}, the Fisher information of this model at params."""
        params = self.check_params(params)
        jac = self.mean_jacobian(params)
        return self.kappa * np.real(np.conj(jac).T @ self.solve(jac))

    def hessian(self, x, params) -> np.ndarray:
        _, weighted, single, params = self._whitened_residual(x, params)
        curvature = np.einsum("nkl,bn->bkl", np.conj(self.mean_second(params)), weighted)
        value = self.kappa * np.real(curvature) - self.fisher_information(params)
        value = 0.5 * (value + np.swapaxes(value, -1, -2))
        return value[0] if single else value

    def sample(self, params, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
        mean = self.mean(self.check_params(params))
        if self.is_complex:
            return sample_complex_gaussian(mean, self.cov, rng, size)
        return sample_gaussian(mean, self.cov, rng, size)


class LinearGaussianModel(GaussianMeanModel):
    """
    x ~ N(H theta, C) with a fixed N x k design matrix H.
    """

    def __init__(self, design, cov, name: str = "linear_gaussian"):
        design = np.asarray(design, dtype=float)
        if design.ndim == 1:
            design = design[:, None]
        super().__init__(design.shape[1], cov, is_complex=False, name=name)
        if design.shape[0] != self.obs_dim:
            raise InvalidInputError(
                f"Design has {design.shape[0]} rows but the covariance is {self.obs_dim} x {self.obs_dim}."
            )
        self.design = design

    @classmethod
    def constant_mean(cls, cov, name: str = "constant_mean") -> "LinearGaussianModel":
        """x ~ N(theta 1, C) with a scalar theta."""
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        return cls(np.ones((cov.shape[0], 1)), cov, name=name)

    def mean(self, params) -> np.ndarray:
        return self.design @ params

    def mean_jacobian(self, params) -> np.ndarray:
        return self.design

    def mean_second(self, params) -> np.ndarray:
        return np.zeros((self.obs_dim, self.param_dim, self.param_dim))


class SteeringGaussianModel(GaussianMeanModel):
    """
    Single-source array snapshot x ~ CN(a(phi) s, C) with params [phi, Re s, Im s].

    phi is restricted to (-pi/2, pi/2).
    """

    def __init__(self, M: int, cov, name: str = "steering"):
        super().__init__(3, cov, is_complex=True, name=name)
        if M != self.obs_dim:
            raise InvalidInputError(f"Covariance must be {M} x {M}.")
        self.M = int(M)

    def in_domain(self, params) -> bool:
        return bool(np.all(np.isfinite(params)) and abs(params[0]) < np.pi / 2)

    @staticmethod
    def amplitude(params) -> complex:
        return complex(params[1], params[2])

    def mean(self, params) -> np.ndarray:
        return steering.steering_vector(params[0], self.M) * self.amplitude(params)

    def mean_jacobian(self, params) -> np.ndarray:
        a = steering.steering_vector(params[0], self.M)
        a_dot = steering.steering_derivative(params[0], self.M)
        return np.stack([a_dot * self.amplitude(params), a, 1j * a], axis=1)

    def mean_second(self, params) -> np.ndarray:
        a_dot = steering.steering_derivative(params[0], self.M)
        a_ddot = steering.steering_second_derivative(params[0], self.M)
        second = np.zeros((self.M, 3, 3), dtype=complex)
        second[:, 0, 0] = a_ddot * self.amplitude(params)
        second[:, 0, 1] = second[:, 1, 0] = a_dot
        second[:, 0, 2] = second[:, 2, 0] = 1j * a_dot
        return second
