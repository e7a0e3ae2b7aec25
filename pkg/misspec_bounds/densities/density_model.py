import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from misspec_bounds.errors import CapabilityError, InvalidInputError
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.finite_difference import default_steps

logger = logging.getLogger(__name__)


class DensityModel(ABC):
    """
    A parametric family of densities on observation vectors.

    Observations are arrays of shape (N,) or batches (n, N); scores and
    Hessians follow the batch shape of x. Parameters are always a single
    real vector of length param_dim.

    Subclasses provide log_pdf. score and hessian default to central finite
    differences of log_pdf and should be overridden when a closed form exists,
    together with the matching capability flag.
    """

    name: str = "density"
    can_sample: bool = False
    has_analytic_score: bool = False
    has_analytic_hessian: bool = False
    is_complex: bool = False

    def __init__(self, param_dim: int, obs_dim: int):
        if param_dim < 1 or obs_dim < 1:
            raise InvalidInputError("param_dim and obs_dim must be positive.")
        self.param_dim = int(param_dim)
        self.obs_dim = int(obs_dim)

    def check_params(self, params) -> np.ndarray:
        params = np.atleast_1d(np.asarray(params, dtype=float))
        if params.shape != (self.param_dim,):
            raise InvalidInputError(
                f"{self.name} expects {self.param_dim} parameters, got shape {params.shape}."
            )
        if not np.all(np.isfinite(params)):
            raise InvalidInputError(f"{self.name} parameters must be finite.")
        return params

    def check_obs(self, x) -> Tuple[np.ndarray, bool]:
        """
        Returns x as a 2-D batch and whether the input was a single observation.
        """
        x = np.asarray(x, dtype=complex if self.is_complex else float)
        single = x.ndim == 1
        batch = np.atleast_2d(x)
        if batch.ndim != 2 or batch.shape[1] != self.obs_dim:
            raise InvalidInputError(
                f"{self.name} expects observations of length {self.obs_dim}, got shape {x.shape}."
            )
        return batch, single

    def in_domain(self, params) -> bool:
        return bool(np.all(np.isfinite(params)))

    @abstractmethod
    def log_pdf(self, x, params):
        """Natural-log density at x; a float for one observation, (n,) for a batch."""

    def score(self, x, params) -> np.ndarray:
        params = self.check_params(params)
        steps = default_steps(params)
        columns = []
        for j in range(self.param_dim):
            e = np.zeros(self.param_dim)
            e[j] = steps[j]
            columns.append(
                (np.asarray(self.log_pdf(x, params + e)) - np.asarray(self.log_pdf(x, params - e)))
                / (2 * steps[j])
            )
        return np.stack(columns, axis=-1)

    def hessian(self, x, params) -> np.ndarray:
        params = self.check_params(params)
        steps = default_steps(params)
        columns = []
        for j in range(self.param_dim):
            e = np.zeros(self.param_dim)
            e[j] = steps[j]
            columns.append((self.score(x, params + e) - self.score(x, params - e)) / (2 * steps[j]))
        h = np.stack(columns, axis=-1)
        return 0.5 * (h + np.swapaxes(h, -1, -2))

    def sample(self, params, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
        raise CapabilityError(f"{self.name} does not support sampling.")

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, param_dim={self.param_dim}, obs_dim={self.obs_dim})"


@dataclass(frozen=True)
class MisspecifiedProblem:
    """
    A true model, an assumed model and the true parameter point.

    Attributes:
        true_model (DensityModel): Sampleable generating density p(x; vartheta).
        assumed_model (DensityModel): Density f(x; theta) used by the estimator.
        theta0 (np.ndarray): True parameter vartheta_0.
        name (str): Label for logs and tables.
    """
    true_model: DensityModel
    assumed_model: DensityModel
    theta0: np.ndarray
    name: str = "problem"

    def __post_init__(self):
        if self.true_model.obs_dim != self.assumed_model.obs_dim:
            raise InvalidInputError(
                f"Observation dimensions differ: {self.true_model.obs_dim} vs {self.assumed_model.obs_dim}."
            )
        if self.true_model.is_complex != self.assumed_model.is_complex:
            raise InvalidInputError("True and assumed models must share the observation field.")
        theta0 = self.true_model.check_params(self.theta0)
        if not self.true_model.in_domain(theta0):
            raise InvalidInputError(f"theta0 {theta0} is outside the true model's domain.")
        object.__setattr__(self, "theta0", theta0)

    def with_theta0(self, theta0) -> "MisspecifiedProblem":
        return MisspecifiedProblem(self.true_model, self.assumed_model, np.asarray(theta0, dtype=float), self.name)

    def sample(self, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
        return self.true_model.sample(self.theta0, rng, size)
