from dataclasses import dataclass

import numpy as np

from misspec_bounds.models.monte_carlo_estimate import MonteCarloEstimate


@dataclass(frozen=True)
class TrialEnsemble:
    """
    Monte Carlo trials of one estimator on one misspecified problem.

    Attributes:
        estimator_name (str): Name of the estimator run.
        estimates (np.ndarray): Retained per-trial estimates, n_retained x k.
        empirical_mse (MonteCarloEstimate): E_p[(est - theta*)(est - theta*)^T].
        regular_bias (MonteCarloEstimate): E_p[est - theta*].
        score_bias (MonteCarloEstimate): E_p[(est - theta*) score_f^T] - A^-1 B.
        true_score_bias (MonteCarloEstimate): E_p[(est - theta*) score_p^T] - A^-1 B_pf.
        max_score_norm (float): Largest norm of score_f evaluated at a trial's
            own estimate.
        n_trials (int): Trials drawn.
        n_excluded (int): Trials whose estimate was not finite.
        seed (int): Seed of the generating stream.
        valid (bool): False when more than 1% of trials were excluded.
    """
    estimator_name: str
    estimates: np.ndarray
    empirical_mse: MonteCarloEstimate
    regular_bias: MonteCarloEstimate
    score_bias: MonteCarloEstimate
    true_score_bias: MonteCarloEstimate
    max_score_norm: float
    n_trials: int
    n_excluded: int
    seed: int
    valid: bool = True

    @property
    def n_retained(self) -> int:
        return self.n_trials - self.n_excluded

    def rmse(self) -> np.ndarray:
        """Per-parameter root mean squared error."""
        return np.sqrt(np.diag(self.empirical_mse.value))
