import numpy as np
import pytest
from scipy import stats

from misspec_bounds.densities.density_model import DensityModel
from misspec_bounds.densities.gaussian_model import LinearGaussianModel, SteeringGaussianModel
from misspec_bounds.densities.steering import toeplitz_covariance
from misspec_bounds.errors import InvalidInputError
from misspec_bounds.models.rng_stream import RngStream


@pytest.fixture
def linear_model():
    design = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [0.5, -1.0]])
    cov = toeplitz_covariance(4, 1.5, 0.4)
    return LinearGaussianModel(design, cov, name="linear")


@pytest.fixture
def steering_model():
    return SteeringGaussianModel(6, toeplitz_covariance(6, 0.5, 0.3), name="array")


@pytest.fixture
def steering_params():
    return np.array([0.4, 0.8, -0.3])


def test_linear_log_pdf_matches_scipy(linear_model):
    theta = np.array([0.2, -0.1])
    x = linear_model.sample(theta, RngStream(1), 5)
    expected = stats.multivariate_normal(linear_model.mean(theta), linear_model.cov).logpdf(x)
    np.testing.assert_allclose(linear_model.log_pdf(x, theta), expected, rtol=1e-12)
    assert isinstance(linear_model.log_pdf(x[0], theta), float)


def test_complex_log_pdf(steering_model, steering_params):
    x = steering_model.sample(steering_params, RngStream(2))
    r = x - steering_model.mean(steering_params)
    quad = np.real(np.conj(r) @ np.linalg.solve(steering_model.cov, r))
    expected = -6 * np.log(np.pi) - np.log(np.linalg.det(steering_model.cov)) - quad
    assert steering_model.log_pdf(x, steering_params) == pytest.approx(expected, rel=1e-12)


def test_linear_score_matches_finite_differences(linear_model):
    theta = np.array([0.2, -0.1])
    x = linear_model.sample(theta, RngStream(3), 4)
    np.testing.assert_allclose(linear_model.score(x, theta), DensityModel.score(linear_model, x, theta), atol=1e-6)


def test_steering_score_matches_finite_differences(steering_model, steering_params):
    x = steering_model.sample(steering_params, RngStream(4), 3)
    analytic = steering_model.score(x, steering_params)
    numeric = DensityModel.score(steering_model, x, steering_params)
    assert analytic.shape == (3, 3)
    np.testing.assert_allclose(analytic, numeric, atol=1e-6)


def test_steering_hessian_matches_finite_differences(steering_model, steering_params):
    x = steering_model.sample(steering_params, RngStream(5), 2)
    analytic = steering_model.hessian(x, steering_params)
    numeric = DensityModel.hessian(steering_model, x, steering_params)
    np.testing.assert_allclose(analytic, numeric, atol=1e-5)


@pytest.mark.parametrize("model_name", ["linear_model", "steering_model"])
def test_fisher_information_is_negative_hessian_at_mean(request, model_name):
    model = request.getfixturevalue(model_name)
    params = np.array([0.2, -0.1]) if model.param_dim == 2 else np.array([0.4, 0.8, -0.3])
    np.testing.assert_allclose(-model.hessian(model.mean(params), params), model.fisher_information(params), atol=1e-10)


def test_steering_domain(steering_model):
    assert steering_model.in_domain(np.array([1.5, 1.0, 0.0]))
    assert not steering_model.in_domain(np.array([np.pi / 2, 1.0, 0.0]))


def test_wrong_parameter_length(linear_model):
    with pytest.raises(InvalidInputError):
        linear_model.log_pdf(np.zeros(4), np.zeros(3))


def test_wrong_observation_length(linear_model):
    with pytest.raises(InvalidInputError):
        linear_model.score(np.zeros(3), np.zeros(2))


def test_design_and_covariance_must_agree():
    with pytest.raises(InvalidInputError):
        LinearGaussianModel(np.ones((3, 1)), np.eye(4))


def test_asymmetric_covariance_rejected():
    with pytest.raises(InvalidInputError):
        LinearGaussianModel(np.ones((2, 1)), np.array([[1.0, 0.5], [0.1, 1.0]]))
