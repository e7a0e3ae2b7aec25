import numpy as np
import pytest

from misspec_bounds.checkers.proportional_score_checker import check_proportional_score, fit_proportional_score
from misspec_bounds.errors import ConditioningError, InvalidInputError
from misspec_bounds.models.rng_stream import RngStream


@pytest.fixture
def source():
    return RngStream(1).generator().standard_normal((30, 2))


def test_exact_fit(source):
    w = np.array([[2.0, 0.5], [-1.0, 3.0]])
    fit = fit_proportional_score(source, source @ w.T)
    np.testing.assert_allclose(fit.w_matrix, w, rtol=1e-12)
    passed, detail = check_proportional_score(fit, w)
    assert passed
    assert "residual" in detail


def test_scalar_expected_broadcasts():
    source = np.arange(1.0, 6.0)[:, None]
    fit = fit_proportional_score(source, -2.0 * source)
    assert check_proportional_score(fit, -2.0)[0]
    assert not check_proportional_score(fit, 2.0)[0]


def test_non_proportional_scores_fail(source):
    fit = fit_proportional_score(source, source**2)
    assert fit.max_residual > 1e-3
    assert not check_proportional_score(fit)[0]


def test_rank_deficient_probes(source):
    flat = np.column_stack([source[:, 0], 2 * source[:, 0]])
    with pytest.raises(ConditioningError):
        fit_proportional_score(flat, source)


def test_sample_counts_must_match(source):
    with pytest.raises(InvalidInputError):
        fit_proportional_score(source, source[:-1])
