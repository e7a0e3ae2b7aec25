import numpy as np
import pytest

from misspec_bounds.errors import DecompositionError
from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.sampling import random_spd, sample_complex_gaussian, sample_gaussian


@pytest.fixture
def covariance():
    return np.array([[2.0, 0.6], [0.6, 1.0]])


def test_stream_reproduces_draws():
    rng = RngStream(42, stream_id=3)
    np.testing.assert_array_equal(rng.generator().standard_normal(5), rng.generator().standard_normal(5))


def test_children_are_distinct_streams():
    rng = RngStream(42)
    assert not np.array_equal(rng.child(0).generator().standard_normal(5), rng.child(1).generator().standard_normal(5))
    assert rng.child(2).child(1) == RngStream(42, 0, (2, 1))


def test_negative_stream_index_rejected():
    with pytest.raises(ValueError):
        RngStream(1, stream_id=-1)


def test_gaussian_shapes(covariance):
    rng = RngStream(1)
    assert sample_gaussian([0.0, 1.0], covariance, rng).shape == (2,)
    assert sample_gaussian([0.0, 1.0], covariance, rng, 7).shape == (7, 2)


def test_gaussian_moments(covariance):
    draws = sample_gaussian([1.0, -1.0], covariance, RngStream(2), 200000)
    np.testing.assert_allclose(draws.mean(axis=0), [1.0, -1.0], atol=0.02)
    np.testing.assert_allclose(np.cov(draws.T), covariance, atol=0.03)


def test_complex_gaussian_is_circular(covariance):
    draws = sample_complex_gaussian(np.zeros(2), covariance, RngStream(3), 200000)
    second = draws.T @ np.conj(draws) / len(draws)
    pseudo = draws.T @ draws / len(draws)
    np.testing.assert_allclose(second, covariance, atol=0.03)
    np.testing.assert_allclose(pseudo, 0.0, atol=0.03)


def test_bad_covariance_raises(covariance):
    with pytest.raises(DecompositionError):
        sample_gaussian([0.0, 0.0], -covariance, RngStream(4), 3)


def test_random_spd_is_positive_definite():
    m = random_spd(6, RngStream(5), jitter=0.1)
    np.testing.assert_array_equal(m, m.T)
    assert np.linalg.eigvalsh(m)[0] >= 0.1 - 1e-12
