import numpy as np
import pytest

from misspec_bounds.checkers.efficiency_checker import check_efficiency, check_efficiency_sweep
from misspec_bounds.models.bound_report import BoundReport
from misspec_bounds.models.monte_carlo_estimate import MonteCarloEstimate
from misspec_bounds.models.trial_ensemble import TrialEnsemble


@pytest.fixture
def report():
    bound = np.array([[0.1]])
    return BoundReport(crb=bound, mcrb=bound, nmcrb=bound, order_ok=True, min_gap_eig=0.0)


def ensemble(mse, max_score_norm=0.0, score_bias=0.0, valid=True):
    def estimate(value):
        return MonteCarloEstimate(np.array([[value]]), np.array([[0.001]]), 10000)

    return TrialEnsemble(
        estimator_name="test",
        estimates=np.zeros((10000, 1)),
        empirical_mse=estimate(mse),
        regular_bias=estimate(0.0),
        score_bias=estimate(score_bias),
        true_score_bias=estimate(0.0),
        max_score_norm=max_score_norm,
        n_trials=10000,
        n_excluded=0,
        seed=0,
        valid=valid,
    )


def test_efficient_mml(report):
    assert check_efficiency(ensemble(0.1005), report) == {"attains_mcrb": True, "is_mml_consistent": True}


def test_below_bound_is_not_efficient(report):
    verdict = check_efficiency(ensemble(0.05, max_score_norm=3.0), report)
    assert verdict == {"attains_mcrb": False, "is_mml_consistent": False}


def test_score_biased_estimator_does_not_attain(report):
    assert not check_efficiency(ensemble(0.1, score_bias=0.5), report)["attains_mcrb"]


def test_invalid_ensemble_does_not_attain(report):
    assert not check_efficiency(ensemble(0.1, valid=False), report)["attains_mcrb"]


def test_sweep(report):
    points = [(-1.0, ensemble(0.1), report), (0.0, ensemble(0.1002), report), (1.0, ensemble(0.3, 2.0), report)]
    consistent, results = check_efficiency_sweep(points)
    assert consistent
    assert [r["theta0"] for r in results] == [-1.0, 0.0, 1.0]
    assert [r["attains_mcrb"] for r in results] == [True, True, False]


def test_sweep_flags_efficiency_without_likelihood_equation(report):
    consistent, _ = check_efficiency_sweep([(0.0, ensemble(0.1, max_score_norm=1.0), report)])
    assert not consistent
