import logging
from typing import Dict, Iterable, Union

import numpy as np

from misspec_bounds.models.monte_carlo_estimate import MonteCarloEstimate
from misspec_bounds.models.trial_ensemble import TrialEnsemble

logger = logging.getLogger(__name__)

CONDITIONS = ("pointwise", "naive_local", "revised_local", "equivalent_local")
EXACT_ATOL = 1e-12


def max_z(estimate: MonteCarloEstimate, reference=0.0) -> float:
    """Largest entrywise z-score; residuals below 1e-12 count as exact."""
    diff = np.abs(np.asarray(estimate.value, dtype=float) - reference)
    z = estimate.z_scores(reference)
    z = np.where(diff <= EXACT_ATOL, 0.0, z)
    return float(np.max(z)) if z.size else 0.0


def unbiasedness_z(ensemble: TrialEnsemble, which: str) -> float:
    """
    Largest z-score over the residuals that define one unbiasedness condition.

    pointwise checks the regular bias only; naive_local adds the true-score
    bias; revised_local adds the assumed-score bias.

    equivalent_local is the naive local condition against an equivalent
    model p~. Its score is g'(1) score_f at the operating point, so its
    residual is g'(1) times the assumed-score bias. Value and standard error
    scale together, so the z-scores, and the verdict, are those of
    revised_local for every g.
    """
    if which not in CONDITIONS:
        raise ValueError(f"Unknown condition '{which}'. Known: {CONDITIONS}.")
    z = [max_z(ensemble.regular_bias)]
    if which == "naive_local":
        z.append(max_z(ensemble.true_score_bias))
    elif which in ("revised_local", "equivalent_local"):
        z.append(max_z(ensemble.score_bias))
    return max(z)


def check_unbiasedness(
    ensemble: TrialEnsemble,
    which: Union[str, Iterable[str]] = "revised_local",
    z_threshold: float = 5.0,
) -> Dict[str, bool]:
    """
    Tests each requested unbiasedness condition at z_threshold standard errors.

    Returns:
        Dict[str, bool]: Verdict per requested condition.
    """
    names = (which,) if isinstance(which, str) else tuple(which)
    verdicts = {}
    for name in names:
        z = unbiasedness_z(ensemble, name)
        verdicts[name] = z <= z_threshold
        logger.debug("%s %s: max z = %.3f", ensemble.estimator_name, name, z)
    return verdicts
