import numpy as np
import pytest

from misspec_bounds.densities.steering import (
    sensor_offsets,
    steering_derivative,
    steering_second_derivative,
    steering_vector,
    toeplitz_covariance,
)
from misspec_bounds.num_utils.finite_difference import fd_jacobian


def test_centred_offsets():
    np.testing.assert_array_equal(sensor_offsets(4), [-1.5, -0.5, 0.5, 1.5])
    assert sensor_offsets(5).sum() == 0


def test_broadside_steering_is_all_ones():
    np.testing.assert_allclose(steering_vector(0.0, 8), np.ones(8))


def test_steering_shape_follows_phi():
    assert steering_vector(np.zeros((3, 2)), 5).shape == (3, 2, 5)


@pytest.mark.parametrize("phi", [-0.9, 0.0, 0.39269908169872414, 1.2])
def test_derivatives_match_finite_differences(phi):
    def parts(f):
        return lambda p: np.concatenate([f(p[0], 6).real, f(p[0], 6).imag])

    numeric = fd_jacobian(parts(steering_vector), [phi])[:, 0]
    analytic = steering_derivative(phi, 6)
    np.testing.assert_allclose(numeric, np.concatenate([analytic.real, analytic.imag]), atol=1e-8)
    numeric = fd_jacobian(parts(steering_derivative), [phi])[:, 0]
    analytic = steering_second_derivative(phi, 6)
    np.testing.assert_allclose(numeric, np.concatenate([analytic.real, analytic.imag]), atol=1e-7)


def test_centro_symmetric_array_is_orthogonal_to_its_derivative():
    a = steering_vector(0.7, 8)
    assert abs(np.vdot(a, steering_derivative(0.7, 8))) < 1e-12


def test_toeplitz_covariance():
    expected = 2.0 * np.array([[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]])
    np.testing.assert_allclose(toeplitz_covariance(3, 2.0, 0.5), expected)
    np.testing.assert_array_equal(toeplitz_covariance(3, 2.0, 0.0), 2.0 * np.eye(3))


def test_toeplitz_covariance_follows_lag_power_law():
    cov = toeplitz_covariance(7, 0.8, 0.3)
    for i in range(7):
        for j in range(7):
            assert cov[i, j] == pytest.approx(0.8 * 0.3 ** abs(i - j), rel=1e-15)
    np.testing.assert_array_equal(cov, cov.T)


@pytest.mark.parametrize("sigma2, rho", [(0.0, 0.1), (1.0, 1.0), (1.0, -0.1)])
def test_toeplitz_rejects_bad_parameters(sigma2, rho):
    with pytest.raises(ValueError):
        toeplitz_covariance(3, sigma2, rho)


def test_array_needs_two_sensors():
    with pytest.raises(ValueError):
        sensor_offsets(1)
