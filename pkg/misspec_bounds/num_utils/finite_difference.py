import logging
from typing import Callable, Optional

import numpy as np

from misspec_bounds.errors import EvaluationError

logger = logging.getLogger(__name__)

CBRT_EPS = np.cbrt(np.finfo(float).eps)


def default_steps(x0) -> np.ndarray:
    """Per-coordinate central-difference step cbrt(eps) * max(1, |x|)."""
    return CBRT_EPS * np.maximum(1.0, np.abs(np.asarray(x0, dtype=float)))


def _evaluate(f, x):
    value = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(value)):
        raise EvaluationError(f"Non-finite function value at {x}.")
    return value


def fd_jacobian(f: Callable, x0, h: Optional[float] = None) -> np.ndarray:
    """
    Central-difference Jacobian of a vector function.

    Parameters:
        f (Callable): Maps a real vector to a real vector (or scalar).
        x0 (array_like): Expansion point.
        h (Optional[float]): Step for every coordinate; None uses default_steps(x0).

    Returns:
        np.ndarray: Shape f(x0).shape + (len(x0),).

    Raises:
        EvaluationError: If f is non-finite at any probe point.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    steps = default_steps(x0) if h is None else np.full(x0.shape, float(h))
    if np.any(steps <= 0):
        raise ValueError("Finite-difference step must be positive.")
    columns = []
    for j in range(x0.size):
        e = np.zeros_like(x0)
        e[j] = steps[j]
        columns.append((_evaluate(f, x0 + e) - _evaluate(f, x0 - e)) / (2 * steps[j]))
    logger.debug("Finite-difference Jacobian at %s used steps %s", x0, steps)
    return np.stack(columns, axis=-1)


def fd_gradient(f: Callable, x0, h: Optional[float] = None) -> np.ndarray:
    """
    Central-difference gradient of a scalar function; error O(h^2).

    Example:
        fd_gradient(lambda x: x @ x, [1.0, 2.0], 1e-5) is (2, 4) to about 1e-10.
    """
    return np.atleast_1d(fd_jacobian(f, x0, h)).reshape(-1)
