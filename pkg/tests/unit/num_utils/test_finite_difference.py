import numpy as np
import pytest

from misspec_bounds.errors import EvaluationError
from misspec_bounds.num_utils.finite_difference import default_steps, fd_gradient, fd_jacobian


def test_gradient_of_quadratic():
    np.testing.assert_allclose(fd_gradient(lambda x: x @ x, [1.0, 2.0], 1e-5), [2.0, 4.0], atol=1e-9)


def test_jacobian_of_vector_function():
    def f(x):
        return np.array([x[0] * x[1], np.sin(x[0]), x[1] ** 3])

    x0 = np.array([0.3, -1.2])
    expected = np.array([[x0[1], x0[0]], [np.cos(x0[0]), 0.0], [0.0, 3 * x0[1] ** 2]])
    np.testing.assert_allclose(fd_jacobian(f, x0), expected, atol=1e-8)


def test_default_steps_scale_with_magnitude():
    steps = default_steps([0.0, 100.0])
    assert steps[1] == pytest.approx(100 * steps[0])


def test_non_finite_value_raises():
    with pytest.raises(EvaluationError):
        fd_gradient(lambda x: np.array([np.inf]), [1.0])


def test_non_positive_step_raises():
    with pytest.raises(ValueError):
        fd_gradient(lambda x: x @ x, [1.0], h=0.0)
