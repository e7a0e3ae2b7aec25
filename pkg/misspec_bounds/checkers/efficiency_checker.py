import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from misspec_bounds.checkers.unbiasedness_checker import check_unbiasedness
from misspec_bounds.models.bound_report import BoundReport
from misspec_bounds.models.trial_ensemble import TrialEnsemble

logger = logging.getLogger(__name__)

SCORE_TOL = 1e-6


def check_efficiency(
    ensemble: TrialEnsemble,
    report: BoundReport,
    z_threshold: float = 5.0,
    score_tol: float = SCORE_TOL,
) -> Dict[str, bool]:
    """
    Misspecified efficiency of one ensemble.

    attains_mcrb: every diagonal MSE entry is within z_threshold standard
    errors of the MCRB diagonal and the revised unbiasedness conditions hold.
    is_mml_consistent: every trial's assumed score at its own estimate has
    norm at most score_tol, i.e. the estimate solves the likelihood equation.
    """
    mse = np.diag(ensemble.empirical_mse.value)
    se = np.diag(ensemble.empirical_mse.std_error)
    bound = np.diag(report.mcrb)
    close = bool(np.all(np.abs(mse - bound) <= z_threshold * se))
    unbiased = check_unbiasedness(ensemble, "revised_local", z_threshold)["revised_local"]
    return {
        "attains_mcrb": close and unbiased and ensemble.valid,
        "is_mml_consistent": bool(ensemble.max_score_norm <= score_tol),
    }


def check_efficiency_sweep(
    points: Sequence[Tuple[float, TrialEnsemble, BoundReport]],
    z_threshold: float = 5.0,
    score_tol: float = SCORE_TOL,
) -> Tuple[bool, List[Dict]]:
    """
    Runs check_efficiency over (theta0, ensemble, report) points.

    A finite sweep cannot certify efficiency on an open set; the per-point
    results are returned as they are. The overall verdict is that every point
    attaining the MCRB also solves the likelihood equation.

    Returns:
        Tuple[bool, List[Dict]]: Overall verdict and one result dict per point.
    """
    results = []
    for theta0, ensemble, report in points:
        verdict = check_efficiency(ensemble, report, z_threshold, score_tol)
        results.append({"theta0": theta0, **verdict})
    consistent = all(r["is_mml_consistent"] for r in results if r["attains_mcrb"])
    if not consistent:
        logger.warning("An estimator attained the MCRB without solving the likelihood equation")
    return consistent, results
