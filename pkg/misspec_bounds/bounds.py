import numpy as np
from scipy import linalg

from misspec_bounds.densities.density_model import DensityModel
from misspec_bounds.errors import InvalidInputError
from misspec_bounds.models.bound_report import BoundReport
from misspec_bounds.models.estimator import Estimator, Target
from misspec_bounds.models.information_set import InformationSet
from misspec_bounds.num_utils.linalg import (
    DEFAULT_LOEWNER_TOL,
    loewner_geq,
    min_eigenvalue,
    spd_factor,
    spd_inverse,
    spd_solve,
    symmetrize,
)


def compute_mcrb(info: InformationSet) -> np.ndarray:
    """
    MCRB = A^-1 B A^-1.

    Raises:
        ConditioningError: If A is singular or cond(A) > 1e12.
    """
    half = spd_solve(info.A, info.B, "A")
    return symmetrize(spd_solve(info.A, half.T, "A"))


def compute_naive_mcrb(info: InformationSet) -> np.ndarray:
    """
    Naive MCRB = A^-1 B_pf J_p^-1 B_pf^T A^-1.

    Raises:
        ConditioningError: If A or J_p is singular or ill-conditioned.
    """
    gain = np.atleast_2d(spd_solve(info.A, info.B_pf, "A"))
    return symmetrize(gain @ np.atleast_2d(spd_solve(info.J_p, gain.T, "J_p")))


def compute_crb(info: InformationSet) -> np.ndarray:
    """Oracle CRB J_p^-1."""
    return spd_inverse(info.J_p, "J_p")


def bound_report(info: InformationSet, tol: float = DEFAULT_LOEWNER_TOL) -> BoundReport:
    mcrb = compute_mcrb(info)
    nmcrb = compute_naive_mcrb(info)
    gap = min_eigenvalue(mcrb - nmcrb)
    return BoundReport(
        crb=compute_crb(info),
        mcrb=mcrb,
        nmcrb=nmcrb,
        order_ok=gap >= -tol,
        min_gap_eig=gap,
    )


def check_order_relation(report: BoundReport, tol: float = DEFAULT_LOEWNER_TOL) -> bool:
    """MCRB >= naive MCRB in Loewner order, within tol."""
    if report.mcrb.shape != report.nmcrb.shape:
        raise InvalidInputError(f"Bound shapes differ: {report.mcrb.shape} vs {report.nmcrb.shape}.")
    return loewner_geq(report.mcrb, report.nmcrb, tol)


def efficient_estimator_map(info: InformationSet, theta_star, assumed: DensityModel) -> Estimator:
    """
    x -> theta* + A^-1 score_f(x; theta*), the estimator attaining the MCRB.
    """
    theta_star = assumed.check_params(theta_star)
    factor = spd_factor(info.A, "A")

    def estimate(x):
        score = np.asarray(assumed.score(x, theta_star))
        return theta_star + linalg.cho_solve(factor, score.T).T

    return Estimator("efficient_map", estimate, Target.PSEUDO_TRUE)


def naive_efficient_estimator_map(info: InformationSet, theta_star, true_model: DensityModel, theta0) -> Estimator:
    """
    x -> theta* + A^-1 B_pf J_p^-1 score_p(x; theta0).

    It needs the true score, so it exists for analysis only.
    """
    theta_star = np.atleast_1d(np.asarray(theta_star, dtype=float))
    theta0 = true_model.check_params(theta0)
    gain = np.atleast_2d(spd_solve(info.A, info.B_pf, "A"))
    j_factor = spd_factor(info.J_p, "J_p")

    def estimate(x):
        score = np.asarray(true_model.score(x, theta0))
        return theta_star + (gain @ linalg.cho_solve(j_factor, score.T)).T

    return Estimator("naive_efficient_map", estimate, Target.PSEUDO_TRUE)
