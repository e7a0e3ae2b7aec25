"""
Pointwise-equivalent densities built from an auxiliary function g.

For an assumed model f with pseudo-true theta*_0 and true density p(x; vartheta_0),

    p~(x; gamma) = g(r(x; gamma)) p(x; vartheta_0) / c(gamma),
    r(x; gamma) = f(x; gamma) / f(x; theta*_0),   c(gamma) = E_p[g(r(x; gamma))].

At gamma_0 = theta*_0 the ratio is 1, so p~ coincides with p and its score is
g'(1) score_f(x; theta*_0).
"""
import logging
import threading
from typing import Dict, Optional, Tuple

import numpy as np

from misspec_bounds.bounds import compute_naive_mcrb
from misspec_bounds.checkers.proportional_score_checker import fit_proportional_score
from misspec_bounds.densities.density_model import DensityModel, MisspecifiedProblem
from misspec_bounds.errors import CapabilityError, ConditioningError, DomainError, InvalidInputError
from misspec_bounds.information import info_monte_carlo
from misspec_bounds.models.g_function import GFunction
from misspec_bounds.models.monte_carlo_estimate import MonteCarloEstimate
from misspec_bounds.models.proportional_score_fit import ProportionalScoreFit
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.accumulate import RunningMoments, run_batches

logger = logging.getLogger(__name__)

DEFAULT_NORMALIZER_SAMPLES = 100000


def identity_g() -> GFunction:
    return GFunction("identity", lambda z: z, lambda z: np.ones_like(np.asarray(z, dtype=float)))


def vuong_g() -> GFunction:
    """1 + exp(1 - z), divided by its value 2 at z = 1."""
    return GFunction("vuong", lambda z: 1.0 + np.exp(1.0 - z), lambda z: -np.exp(1.0 - z))


G_FUNCTIONS = {"identity": identity_g, "vuong": vuong_g}
G_ALIASES = {"shifted_exp": "vuong"}


def g_function(name: str) -> GFunction:
    """Looks up a built-in g by name or alias; aliases resolve to the canonical name."""
    try:
        return G_FUNCTIONS[G_ALIASES.get(name, name)]()
    except KeyError:
        known = sorted(set(G_FUNCTIONS) | set(G_ALIASES))
        raise InvalidInputError(f"Unknown g-function '{name}'. Known: {known}.") from None


class EquivalentModel:
    """
    The equivalent density p~ for one problem, g and operating point gamma_0.

    Normalizer estimates are cached per (gamma, n, stream); the cache is safe
    to share between threads.
    """

    def __init__(self, base: MisspecifiedProblem, gfun: GFunction, theta_star0):
        self.base = base
        self.gfun = gfun
        self.theta_star0 = base.assumed_model.check_params(theta_star0)
        self._normalizer_cache: Dict[Tuple, MonteCarloEstimate] = {}
        self._lock = threading.Lock()

    @property
    def g_prime_at_one(self) -> float:
        return self.gfun.g_prime_at_one

    def is_base(self, gamma) -> bool:
        return bool(np.array_equal(np.asarray(gamma, dtype=float), self.theta_star0))

    def log_likelihood_ratio(self, x, gamma):
        """log f(x; gamma) - log f(x; theta*_0); exactly 0 at gamma_0."""
        assumed = self.base.assumed_model
        gamma = assumed.check_params(gamma)
        if self.is_base(gamma):
            return np.zeros_like(np.asarray(assumed.log_pdf(x, gamma), dtype=float))
        return np.asarray(assumed.log_pdf(x, gamma)) - np.asarray(assumed.log_pdf(x, self.theta_star0))

    def likelihood_ratio(self, x, gamma):
        return np.exp(self.log_likelihood_ratio(x, gamma))

    def normalizer(
        self,
        gamma,
        n: int = DEFAULT_NORMALIZER_SAMPLES,
        rng: Optional[RngStream] = None,
        batch_size: int = 2000,
        workers: int = 1,
    ) -> MonteCarloEstimate:
        """
        c(gamma) = E_p[g(r(x; gamma))] as a sample average over draws from p.

        Exactly 1 with zero standard error at gamma_0.

        Raises:
            CapabilityError: If p cannot be sampled.
        """
        gamma = self.base.assumed_model.check_params(gamma)
        if self.is_base(gamma):
            return MonteCarloEstimate(value=np.float64(1.0), std_error=np.float64(0.0), n_samples=max(n, 1))
        if not self.base.true_model.can_sample:
            raise CapabilityError(f"{self.base.true_model.name} cannot be sampled.")
        if rng is None or n < 2:
            raise InvalidInputError("The normalizer needs a random stream and at least two samples.")
        key = (tuple(gamma), int(n), rng)
        with self._lock:
            cached = self._normalizer_cache.get(key)
        if cached is not None:
            return cached

        def batch(stream: RngStream, size: int):
            x = self.base.sample(stream, size)
            return RunningMoments.of(self.gfun(self.likelihood_ratio(x, gamma)))

        total = RunningMoments()
        for part in run_batches(batch, rng, n, batch_size, workers):
            total.merge(part)
        estimate = total.estimate()
        with self._lock:
            self._normalizer_cache.setdefault(key, estimate)
        return estimate

    def log_pdf_equivalent(self, x, gamma, c_value: float):
        """
        log g(r(x; gamma)) + log p(x; vartheta_0) - log c_value.

        Raises:
            DomainError: If c_value is not positive or g is not positive at r.
        """
        if not c_value > 0:
            raise DomainError(f"Normalizer must be positive, got {c_value}.")
        log_p = np.asarray(self.base.true_model.log_pdf(x, self.base.theta0))
        return self.gfun.log(self.likelihood_ratio(x, gamma)) + log_p - np.log(c_value)

    def equivalent_score_at_base(self, x) -> np.ndarray:
        """g'(1) score_f(x; theta*_0); the gradient of log c vanishes at gamma_0."""
        return self.g_prime_at_one * np.asarray(self.base.assumed_model.score(x, self.theta_star0))

    def as_true_model(self, n: int = DEFAULT_NORMALIZER_SAMPLES, rng: Optional[RngStream] = None) -> "EquivalentDensity":
        return EquivalentDensity(self, n, rng)

    def as_problem(self, n: int = DEFAULT_NORMALIZER_SAMPLES, rng: Optional[RngStream] = None) -> MisspecifiedProblem:
        """The misspecified problem with p~ in place of p, true parameter gamma_0."""
        return MisspecifiedProblem(
            self.as_true_model(n, rng),
            self.base.assumed_model,
            self.theta_star0,
            name=f"{self.base.name}_{self.gfun.name}_equivalent",
        )


class EquivalentDensity(DensityModel):
    """
    p~ as a DensityModel in gamma.

    Sampling is available at gamma_0 only, where p~ equals p. The analytic
    score is available at gamma_0; elsewhere it falls back to finite
    differences of a Monte Carlo normalized log-density.
    """

    can_sample = True
    has_analytic_score = True

    def __init__(self, model: EquivalentModel, n: int = DEFAULT_NORMALIZER_SAMPLES, rng: Optional[RngStream] = None):
        base = model.base
        super().__init__(base.assumed_model.param_dim, base.true_model.obs_dim)
        self.model = model
        self.name = f"{model.gfun.name}_equivalent"
        self.is_complex = base.true_model.is_complex
        self._n = n
        self._rng = rng

    def log_pdf(self, x, params):
        params = self.check_params(params)
        c_value = float(self.model.normalizer(params, self._n, self._rng).value)
        return self.model.log_pdf_equivalent(x, params, c_value)

    def score(self, x, params) -> np.ndarray:
        params = self.check_params(params)
        if self.model.is_base(params):
            return self.model.equivalent_score_at_base(x)
        return super().score(x, params)

    def sample(self, params, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
        if not self.model.is_base(self.check_params(params)):
            raise CapabilityError("The equivalent density can only be sampled at gamma_0.")
        return self.model.base.sample(rng, size)


def verify_proportional_score(model: EquivalentModel, n_probe: int, rng: RngStream) -> ProportionalScoreFit:
    """
    Fits score_f = W score_p~ over n_probe draws from p at gamma_0.

    A rank-deficient probe set is retried once with twice the probes.

    Raises:
        InvalidInputError: If n_probe is smaller than the parameter dimension.
        ConditioningError: If the retry is rank deficient too.
    """
    k = model.base.assumed_model.param_dim
    if n_probe < k:
        raise InvalidInputError(f"n_probe must be at least {k}.")
    for attempt, probes in enumerate((n_probe, 2 * n_probe)):
        x = model.base.sample(rng.child(attempt), probes)
        try:
            return fit_proportional_score(
                model.equivalent_score_at_base(x), model.base.assumed_model.score(x, model.theta_star0)
            )
        except ConditioningError:
            logger.warning("Rank-deficient probe set of %d draws, retrying with more", probes)
    raise ConditioningError("Probe scores stayed rank deficient after retry.")


def naive_mcrb_through_equivalent(
    model: EquivalentModel,
    n: int,
    rng: RngStream,
    groups: int = 20,
    batch_size: int = 2000,
    workers: int = 1,
) -> MonteCarloEstimate:
    """
    Naive MCRB with p~ in place of p, from Monte Carlo information matrices.

    The value uses all n draws; the standard error is the spread of the bound
    over `groups` disjoint sub-samples divided by sqrt(groups).
    """
    if groups < 2 or n < 2 * groups:
        raise InvalidInputError("Need at least two groups of two samples.")
    problem = model.as_problem()
    size = n // groups
    per_group = [
        compute_naive_mcrb(info_monte_carlo(problem, model.theta_star0, size, rng.child(g), batch_size, workers))
        for g in range(groups)
    ]
    full = compute_naive_mcrb(info_monte_carlo(problem, model.theta_star0, n, rng, batch_size, workers))
    spread = np.std(np.stack(per_group), axis=0, ddof=1)
    return MonteCarloEstimate(value=full, std_error=spread / np.sqrt(groups), n_samples=n)


def normalization_residual(
    model: EquivalentModel,
    gamma,
    n: int,
    rng: RngStream,
    batch_size: int = 2000,
    workers: int = 1,
) -> MonteCarloEstimate:
    """
    E_p[g(r(x; gamma))] / c(gamma) with numerator and c(gamma) estimated from
    independent streams; a valid density gives 1.
    """
    c = model.normalizer(gamma, n, rng.child(0), batch_size, workers)
    m = model.normalizer(gamma, n, rng.child(1), batch_size, workers)
    c_value, m_value = float(c.value), float(m.value)
    ratio = m_value / c_value
    rel = np.hypot(float(m.std_error) / m_value, float(c.std_error) / c_value)
    return MonteCarloEstimate(value=np.float64(ratio), std_error=np.float64(ratio * rel), n_samples=n)
