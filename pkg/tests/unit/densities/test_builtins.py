import numpy as np
import pytest

from misspec_bounds.densities.builtins import (
    box1_problem,
    box3_problem,
    build_model,
    correctly_specified,
    doa_problem,
    linear_problem,
    random_white_problem,
)
from misspec_bounds.densities.density_model import DensityModel, MisspecifiedProblem
from misspec_bounds.densities.gaussian_model import LinearGaussianModel
from misspec_bounds.errors import CapabilityError, InvalidInputError
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.accumulate import mean_with_se


class UnitExponential(DensityModel):
    """Scalar exponential family with no sampler."""

    name = "exponential"

    def __init__(self):
        super().__init__(1, 1)

    def log_pdf(self, x, params):
        batch, single = self.check_obs(x)
        rate = self.check_params(params)[0]
        value = np.log(rate) - rate * batch[:, 0]
        return float(value[0]) if single else value


def test_box1_covariances():
    problem = box1_problem(4, 1.0, 0.05, 0.3)
    np.testing.assert_array_equal(np.diag(problem.true_model.cov), [0.05, 1.0, 1.0, 1.0])
    np.testing.assert_array_equal(problem.assumed_model.cov, np.eye(4))
    np.testing.assert_array_equal(problem.theta0, [0.3])


def test_box3_covariances():
    problem = box3_problem(5, 2.0, 1.0)
    np.testing.assert_array_equal(problem.true_model.cov, 2.0 * np.eye(5))
    np.testing.assert_array_equal(problem.assumed_model.cov, np.eye(5))


def test_doa_problem_parameters():
    problem = doa_problem(8, 0.1, 0.5, 0.3, complex(0.6, -0.2))
    np.testing.assert_allclose(problem.theta0, [0.3, 0.6, -0.2])
    assert problem.true_model.is_complex and problem.assumed_model.is_complex
    np.testing.assert_allclose(problem.assumed_model.cov, 0.1 * np.eye(8))


def test_random_white_problem_keeps_average_variance():
    problem = random_white_problem(5, RngStream(3))
    assert np.trace(problem.assumed_model.cov) == pytest.approx(np.trace(problem.true_model.cov))


@pytest.mark.parametrize("kwargs", [dict(N=3, sigma2=-1.0, epsilon=0.1), dict(N=3, sigma2=1.0, epsilon=0.0)])
def test_box1_rejects_non_positive_variances(kwargs):
    with pytest.raises(InvalidInputError):
        box1_problem(**kwargs)


def test_build_model_by_name():
    model = build_model("box1_assumed", N=3, sigma2=2.0)
    assert isinstance(model, LinearGaussianModel)
    with pytest.raises(InvalidInputError):
        build_model("no_such_model")


def test_problem_requires_same_observation_dimension():
    with pytest.raises(InvalidInputError):
        MisspecifiedProblem(box1_problem(3, 1.0, 0.1).true_model, box1_problem(4, 1.0, 0.1).assumed_model, np.zeros(1))


def test_problem_requires_same_field():
    doa = doa_problem(3, 1.0, 0.0, 0.1, 1 + 0j)
    real = LinearGaussianModel(np.ones((3, 3)), np.eye(3))
    with pytest.raises(InvalidInputError):
        MisspecifiedProblem(doa.true_model, real, np.zeros(3))


def test_theta0_outside_domain():
    with pytest.raises(InvalidInputError):
        doa_problem(4, 1.0, 0.0, 2.0, 1 + 0j)


def test_sampling_unsupported_model():
    model = UnitExponential()
    problem = correctly_specified(model, [2.0])
    with pytest.raises(CapabilityError):
        problem.sample(RngStream(0), 3)


def test_linear_problem_with_different_designs():
    problem = linear_problem(np.ones((3, 2)), np.eye(3), np.ones((3, 1)), np.eye(3), [1.0, 2.0])
    assert problem.true_model.param_dim == 2
    assert problem.assumed_model.param_dim == 1


BUILTIN_MODELS = [
    ("box1_true", dict(N=5, sigma2=1.0, epsilon=0.05)),
    ("box1_assumed", dict(N=5, sigma2=1.0)),
    ("box3_true", dict(N=5, sigma1_sq=2.0)),
    ("box3_assumed", dict(N=5, sigma2_sq=1.0)),
    ("doa_true", dict(M=8, sigma2=0.1, rho=0.5)),
    ("doa_assumed", dict(M=8, sigma2=0.1)),
]


def random_params(model, gen):
    if model.is_complex:
        return np.array([gen.uniform(-1.2, 1.2), *gen.normal(size=2)])
    return gen.normal(scale=2.0, size=model.param_dim)


def relative_error(numeric, analytic):
    return float(np.max(np.abs(numeric - analytic)) / max(1.0, np.max(np.abs(analytic))))


@pytest.mark.parametrize("name, kwargs", BUILTIN_MODELS)
def test_score_and_hessian_match_finite_differences(name, kwargs):
    model = build_model(name, **kwargs)
    stream = RngStream(31, stream_id=BUILTIN_MODELS.index((name, kwargs)))
    gen = stream.generator()
    for i in range(100):
        params = random_params(model, gen)
        x = model.sample(random_params(model, gen), stream.child(i))
        assert relative_error(DensityModel.score(model, x, params), model.score(x, params)) <= 1e-6
        assert relative_error(DensityModel.hessian(model, x, params), model.hessian(x, params)) <= 1e-5


@pytest.mark.parametrize("name, kwargs", BUILTIN_MODELS)
def test_true_score_has_zero_mean(name, kwargs):
    model = build_model(name, **kwargs)
    stream = RngStream(32, stream_id=BUILTIN_MODELS.index((name, kwargs)))
    params = random_params(model, stream.generator())
    x = model.sample(params, stream.child(0), 100000)
    estimate = mean_with_se([model.score(x, params)])
    assert np.max(estimate.z_scores(0.0)) <= 5.0
