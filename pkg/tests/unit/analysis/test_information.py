import numpy as np
import pytest

from misspec_bounds.checkers.unbiasedness_checker import max_z
from misspec_bounds.densities.builtins import box1_problem, doa_problem
from misspec_bounds.densities.density_model import DensityModel, MisspecifiedProblem
from misspec_bounds.errors import CapabilityError, InvalidInputError
from misspec_bounds.information import info_analytic, info_monte_carlo
from misspec_bounds.models.monte_carlo_estimate import MonteCarloEstimate
from misspec_bounds.models.rng_stream import RngStream

MATRICES = ("A", "B", "B_pf", "J_p")


class ScalarLaplace(DensityModel):
    name = "laplace"

    def __init__(self):
        super().__init__(1, 1)

    def log_pdf(self, x, params):
        batch, single = self.check_obs(x)
        value = -np.log(2.0) - np.abs(batch[:, 0] - self.check_params(params)[0])
        return float(value[0]) if single else value


def as_estimate(info, name):
    return MonteCarloEstimate(getattr(info, name), getattr(info, f"{name}_se"), info.n_samples)


@pytest.mark.parametrize("N", [2, 10, 60])
def test_box1_closed_forms(N):
    sigma2, eps = 1.5, 0.05
    info = info_analytic(box1_problem(N, sigma2, eps), [0.0])
    np.testing.assert_allclose(info.A, [[N / sigma2]], rtol=1e-14)
    np.testing.assert_allclose(info.B, [[(eps + (N - 1) * sigma2) / sigma2**2]], rtol=1e-14)
    np.testing.assert_allclose(info.B_pf, [[N / sigma2]], rtol=1e-14)
    np.testing.assert_allclose(info.J_p, [[1 / eps + (N - 1) / sigma2]], rtol=1e-14)
    assert info.method == "analytic"
    assert info.assumed_dim == info.true_dim == 1


def test_drift_enters_b_away_from_pseudo_true():
    problem = box1_problem(4, 1.0, 0.1)
    info = info_analytic(problem, [0.5])
    # score_f(mu_p; 0.5) = 4 * (0 - 0.5)
    assert info.B[0, 0] == pytest.approx((0.1 + 3.0) + 4.0)


def test_doa_white_noise_information_equality():
    problem = doa_problem(8, 0.1, 0.0, 0.39269908169872414, complex(0.7071067811865476, 0.7071067811865476))
    info = info_analytic(problem, problem.theta0)
    assert np.max(np.abs(info.A - info.B)) / np.max(np.abs(info.A)) <= 1e-12
    np.testing.assert_allclose(info.J_p, info.A, rtol=1e-12)


def test_doa_fisher_diagonal():
    M, sigma2, phi = 8, 0.1, 0.39269908169872414
    s = complex(0.7071067811865476, 0.7071067811865476)
    info = info_analytic(doa_problem(M, sigma2, 0.0, phi, s), [phi, s.real, s.imag])
    d = np.arange(1, M + 1) - (M + 1) / 2
    a_dot_sq = np.sum((np.pi * d * np.cos(phi)) ** 2)
    expected = (2 / sigma2) * np.diag([a_dot_sq * abs(s) ** 2, M, M])
    np.testing.assert_allclose(info.A, expected, rtol=1e-12, atol=1e-9)


def test_non_gaussian_pair_has_no_closed_form():
    problem = MisspecifiedProblem(ScalarLaplace(), box1_problem(1, 1.0, 1.0).assumed_model, np.zeros(1))
    with pytest.raises(CapabilityError):
        info_analytic(problem, [0.0])


def test_monte_carlo_needs_sampling():
    problem = MisspecifiedProblem(ScalarLaplace(), box1_problem(1, 1.0, 1.0).assumed_model, np.zeros(1))
    with pytest.raises(CapabilityError):
        info_monte_carlo(problem, [0.0], 100, RngStream(0))


def test_monte_carlo_needs_two_samples():
    with pytest.raises(InvalidInputError):
        info_monte_carlo(box1_problem(3, 1.0, 0.1), [0.0], 1, RngStream(0))


def test_box1_monte_carlo_agrees_with_closed_form():
    problem = box1_problem(5, 1.0, 0.05)
    analytic = info_analytic(problem, [0.0])
    estimate = info_monte_carlo(problem, [0.0], 20000, RngStream(17), batch_size=3000)
    assert estimate.method == "monte_carlo"
    assert estimate.n_samples == 20000
    # the Hessian of a linear model does not depend on x
    np.testing.assert_allclose(estimate.A, analytic.A, rtol=1e-14)
    for name in MATRICES:
        assert max_z(as_estimate(estimate, name), getattr(analytic, name)) <= 5


def test_doa_monte_carlo_agrees_with_closed_form():
    problem = doa_problem(4, 0.5, 0.5, 0.3, complex(1.0, 0.5))
    analytic = info_analytic(problem, problem.theta0)
    estimate = info_monte_carlo(problem, problem.theta0, 20000, RngStream(18), workers=3)
    for name in MATRICES:
        assert max_z(as_estimate(estimate, name), getattr(analytic, name)) <= 5


def test_monte_carlo_independent_of_workers():
    problem = box1_problem(3, 1.0, 0.1)
    serial = info_monte_carlo(problem, [0.0], 5000, RngStream(2), batch_size=1000, workers=1)
    threaded = info_monte_carlo(problem, [0.0], 5000, RngStream(2), batch_size=1000, workers=4)
    np.testing.assert_array_equal(serial.B, threaded.B)
    np.testing.assert_array_equal(serial.B_pf_se, threaded.B_pf_se)


def test_monte_carlo_stable_when_samples_double():
    problem = doa_problem(4, 0.5, 0.5, 0.3, complex(1.0, 0.5))
    small = info_monte_carlo(problem, problem.theta0, 10000, RngStream(19))
    large = info_monte_carlo(problem, problem.theta0, 20000, RngStream(20))
    for name in MATRICES:
        a, b = as_estimate(small, name), as_estimate(large, name)
        change = MonteCarloEstimate(a.value - b.value, np.hypot(a.std_error, b.std_error), b.n_samples)
        assert max_z(change) <= 5
