import numpy as np
import pytest

from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.accumulate import (
    RunningMoments,
    batch_sizes,
    mean_with_se,
    pairwise_sum,
    run_batches,
)


def test_pairwise_sum_over_leading_axis():
    total = pairwise_sum(np.ones((1000, 2, 3)))
    assert total.shape == (2, 3)
    assert np.all(total == 1000)


def test_mean_with_se_example():
    estimate = mean_with_se([np.ones((10, 2)), np.zeros((10, 2))])
    np.testing.assert_allclose(estimate.value, [0.5, 0.5])
    assert estimate.n_samples == 20
    # s^2 = 20 * 0.25 / 19
    np.testing.assert_allclose(estimate.std_error, np.sqrt(20 * 0.25 / 19 / 20))


def test_merged_batches_match_single_pass():
    data = RngStream(7).generator().standard_normal((5000, 3))
    merged = RunningMoments()
    for chunk in np.array_split(data, 7):
        merged.update(chunk)
    single = RunningMoments.of(data).estimate()
    estimate = merged.estimate()
    np.testing.assert_allclose(estimate.value, data.mean(axis=0), atol=1e-14)
    np.testing.assert_allclose(estimate.value, single.value, atol=1e-14)
    np.testing.assert_allclose(estimate.std_error, data.std(axis=0, ddof=1) / np.sqrt(5000), rtol=1e-10)


def test_estimate_needs_two_samples():
    with pytest.raises(ValueError):
        RunningMoments.of(np.ones((1, 2))).estimate()


def test_empty_batch_merges_as_identity():
    moments = RunningMoments.of(np.arange(4.0)[:, None])
    moments.merge(RunningMoments.of(np.zeros((0, 1))))
    assert moments.count == 4


@pytest.mark.parametrize("total, size, expected", [
    (5000, 2000, [2000, 2000, 1000]),
    (4000, 2000, [2000, 2000]),
    (0, 10, []),
    (3, 10, [3]),
])
def test_batch_sizes(total, size, expected):
    assert batch_sizes(total, size) == expected


def test_batch_sizes_rejects_bad_input():
    with pytest.raises(ValueError):
        batch_sizes(10, 0)


def test_run_batches_independent_of_worker_count():
    def work(stream, size):
        return stream.generator().standard_normal(size).sum()

    rng = RngStream(123, stream_id=4)
    serial = run_batches(work, rng, 10500, batch_size=1000, workers=1)
    threaded = run_batches(work, rng, 10500, batch_size=1000, workers=4)
    assert len(serial) == 11
    assert serial == threaded


@pytest.mark.parametrize("factor, expected", [(2, 1 / np.sqrt(2)), (4, 0.5)])
def test_std_error_scales_as_inverse_root_n(factor, expected):
    small = mean_with_se([RngStream(21, stream_id=0).generator().standard_normal(10000)])
    large = mean_with_se([RngStream(21, stream_id=1).generator().standard_normal(10000 * factor)])
    assert float(large.std_error / small.std_error) == pytest.approx(expected, rel=0.2)
