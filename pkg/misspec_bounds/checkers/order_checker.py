import numpy as np

from misspec_bounds.models.bound_report import BoundReport
from misspec_bounds.models.information_set import InformationSet
from misspec_bounds.models.trial_ensemble import TrialEnsemble
from misspec_bounds.num_utils.linalg import DEFAULT_LOEWNER_TOL, min_eigenvalue, spd_solve


class OrderChecker:
    """
    Loewner-order checks between bounds, information matrices and MSEs.

    Each check returns (passed, smallest eigenvalue of the difference).
    """

    tol: float

    def initiate(self, tol: float = DEFAULT_LOEWNER_TOL) -> None:
        if tol < 0:
            raise ValueError("tol must be non-negative.")
        self.tol = tol

    def run(self, report: BoundReport) -> tuple[bool, float]:
        """MCRB >= naive MCRB."""
        gap = min_eigenvalue(report.mcrb - report.nmcrb)
        return gap >= -self.tol, gap

    def cauchy_schwarz(self, info: InformationSet) -> tuple[bool, float]:
        """B >= B_pf J_p^-1 B_pf^T."""
        B_pf = np.atleast_2d(info.B_pf)
        projected = B_pf @ np.atleast_2d(spd_solve(info.J_p, B_pf.T, "J_p"))
        gap = min_eigenvalue(info.B - projected)
        return gap >= -self.tol, gap

    def mse_above_bound(self, ensemble: TrialEnsemble, bound, z_threshold: float = 5.0) -> tuple[bool, float]:
        """Empirical MSE >= bound - z_threshold * (MSE std-error matrix)."""
        slack = z_threshold * np.asarray(ensemble.empirical_mse.std_error)
        gap = min_eigenvalue(ensemble.empirical_mse.value - np.asarray(bound) + slack)
        return gap >= -self.tol, gap


def main():
    from misspec_bounds.bounds import bound_report
    from misspec_bounds.densities.builtins import box1_problem
    from misspec_bounds.information import info_analytic

    problem = box1_problem(N=10, sigma2=1.0, epsilon=0.05)
    info = info_analytic(problem, problem.theta0)
    checker = OrderChecker()
    checker.initiate()
    print(checker.run(bound_report(info)))  # (True, 0.0560...)
    print(checker.cauchy_schwarz(info))


if __name__ == "__main__":
    main()
