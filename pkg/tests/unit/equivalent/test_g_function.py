import numpy as np
import pytest

from misspec_bounds.equivalent_model import g_function, identity_g, vuong_g
from misspec_bounds.errors import DomainError, InvalidInputError
from misspec_bounds.models.g_function import GFunction


def test_identity():
    g = identity_g()
    assert g.g_at_one == 1.0
    assert g.g_prime_at_one == 1.0
    np.testing.assert_array_equal(g(np.array([0.5, 2.0])), [0.5, 2.0])


def test_vuong_is_normalized_at_one():
    g = vuong_g()
    assert g.g_at_one == 2.0
    assert g(1.0) == 1.0
    assert g.g_prime_at_one == -0.5
    assert g.prime(1.0) == -0.5


def test_log_of_vuong():
    g = vuong_g()
    z = np.array([0.1, 1.0, 7.0])
    np.testing.assert_allclose(g.log(z), np.log((1 + np.exp(1 - z)) / 2), rtol=1e-14)


def test_registry():
    assert g_function("vuong").name == "vuong"
    with pytest.raises(InvalidInputError):
        g_function("cubic")


def test_alias_resolves_to_vuong():
    alias, canonical = g_function("shifted_exp"), g_function("vuong")
    assert alias.name == "vuong"
    z = np.array([0.3, 1.0, 4.0])
    np.testing.assert_array_equal(alias(z), canonical(z))
    assert alias.g_prime_at_one == canonical.g_prime_at_one == -0.5


def test_derivative_must_match_function():
    with pytest.raises(InvalidInputError):
        GFunction("bad", lambda z: z, lambda z: 2.0 * np.ones_like(np.asarray(z, dtype=float)))


def test_zero_derivative_at_one_rejected():
    with pytest.raises(InvalidInputError):
        GFunction("flat", lambda z: (z - 1.0) ** 2 + 1.0, lambda z: 2.0 * (z - 1.0))


def test_non_positive_at_one_rejected():
    with pytest.raises(InvalidInputError):
        GFunction("negative", lambda z: z - 2.0, lambda z: np.ones_like(np.asarray(z, dtype=float)))


def test_non_positive_value_raises_domain_error():
    with pytest.raises(DomainError):
        identity_g()(np.array([1.0, -0.5]))
