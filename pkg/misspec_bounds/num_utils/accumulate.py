from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

from misspec_bounds.models.monte_carlo_estimate import MonteCarloEstimate
from misspec_bounds.models.rng_stream import RngStream

T = TypeVar("T")


def pairwise_sum(samples) -> np.ndarray:
    """
    Sum over the leading axis in extended precision.

    numpy sums pairwise only along a contiguous last axis, so the sample axis
    is moved there first.
    """
    a = np.asarray(samples)
    moved = np.ascontiguousarray(np.moveaxis(a, 0, -1), dtype=np.longdouble)
    return moved.sum(axis=-1)


class RunningMoments:
    """
    Mean and entrywise variance of a stream of sample batches.

    Batches are merged with Chan's parallel update in the order they are
    given, which makes the result independent of how batches were scheduled.
    """

    def __init__(self):
        self.count = 0
        self.mean: Optional[np.ndarray] = None
        self.m2: Optional[np.ndarray] = None

    @classmethod
    def of(cls, batch) -> "RunningMoments":
        """Moments of a single batch of samples stacked along axis 0."""
        moments = cls()
        batch = np.asarray(batch, dtype=float)
        n = batch.shape[0]
        if n == 0:
            return moments
        moments.count = n
        moments.mean = pairwise_sum(batch) / n
        moments.m2 = pairwise_sum((batch - moments.mean.astype(float)) ** 2)
        return moments

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return self
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (np.longdouble(other.count) / total)
        self.m2 = self.m2 + other.m2 + delta**2 * (np.longdouble(self.count) * other.count / total)
        self.count = total
        return self

    def update(self, batch) -> "RunningMoments":
        return self.merge(RunningMoments.of(batch))

    def estimate(self) -> MonteCarloEstimate:
        """
        Sample mean with standard error sqrt(s^2 / n).

        Raises:
            ValueError: If fewer than two samples were accumulated.
        """
        if self.count < 2:
            raise ValueError("At least two samples are needed for a standard error.")
        variance = self.m2 / (self.count - 1)
        se = np.sqrt(np.maximum(variance, 0) / self.count)
        return MonteCarloEstimate(
            value=np.asarray(self.mean, dtype=float),
            std_error=np.asarray(se, dtype=float),
            n_samples=self.count,
        )


def mean_with_se(batches: Iterable) -> MonteCarloEstimate:
    """
    Merges batches of per-sample values, in order, into a MonteCarloEstimate.

    Example:
        mean_with_se([np.ones((10, 2)), np.zeros((10, 2))]).value is (0.5, 0.5).
    """
    moments = RunningMoments()
    for batch in batches:
        moments.update(batch)
    return moments.estimate()


def batch_sizes(total: int, batch_size: int) -> List[int]:
    if total < 0 or batch_size < 1:
        raise ValueError("total must be non-negative and batch_size positive.")
    full, rest = divmod(total, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def run_batches(
    work: Callable[[RngStream, int], T],
    rng: RngStream,
    total: int,
    batch_size: int = 2000,
    workers: int = 1,
) -> List[T]:
    """
    Runs work(rng.child(b), size_b) for every batch b of a total-sample job.

    Batch b always draws from child stream b and results come back in batch
    order, so the outcome does not depend on the number of workers.
    """
    sizes = batch_sizes(total, batch_size)
    streams = [rng.child(b) for b in range(len(sizes))]
    if workers <= 1 or len(sizes) <= 1:
        return [work(s, n) for s, n in zip(streams, sizes)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(work, streams, sizes))
