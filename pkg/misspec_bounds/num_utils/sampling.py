from typing import Optional

import numpy as np

from misspec_bounds.models.rng_stream import RngStream
from misspec_bounds.num_utils.linalg import cholesky_lower


def sample_gaussian(mean, cov, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
    """
    Draws from N(mean, cov) as mean + L z with L the lower Cholesky factor of cov.

    Parameters:
        mean (array_like): Mean vector, length N.
        cov (array_like): Positive definite N x N covariance.
        rng (RngStream): Stream to draw from; the same stream reproduces the same draws.
        size (Optional[int]): Number of draws. None returns a single vector.

    Returns:
        np.ndarray: Shape (N,) or (size, N).

    Raises:
        DecompositionError: If cov is not positive definite.
    """
    mean = np.asarray(mean, dtype=float)
    chol = cholesky_lower(cov)
    n = 1 if size is None else int(size)
    z = rng.generator().standard_normal((n, chol.shape[0]))
    draws = mean + z @ chol.T
    return draws[0] if size is None else draws


def sample_complex_gaussian(mean, cov, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
    """
    Draws from the circularly symmetric complex Gaussian CN(mean, cov).

    The real and imaginary parts of the whitened noise are independent N(0, 1/2),
    so E[v v^H] = cov and E[v v^T] = 0.
    """
    mean = np.asarray(mean, dtype=complex)
    chol = cholesky_lower(cov)
    n = 1 if size is None else int(size)
    z = rng.generator().standard_normal((n, chol.shape[0], 2))
    w = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
    draws = mean + w @ chol.T
    return draws[0] if size is None else draws


def random_spd(dim: int, rng: RngStream, jitter: float = 0.1) -> np.ndarray:
    """
    Random positive definite matrix F F^T / dim + jitter I from a Gaussian factor F.
    """
    factor = rng.generator().standard_normal((dim, dim))
    return factor @ factor.T / dim + jitter * np.eye(dim)
