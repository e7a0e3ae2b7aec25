import numpy as np
from scipy import linalg

from misspec_bounds.errors import ConditioningError, DecompositionError, InvalidInputError

DEFAULT_LOEWNER_TOL = 1e-8
MAX_CONDITION = 1e12


def as_finite_matrix(m, name: str = "matrix") -> np.ndarray:
    """
    Returns m as a finite, square float array.

    Raises:
        InvalidInputError: If m is not square or has non-finite entries.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InvalidInputError(f"{name} must be a non-empty square matrix, got shape {m.shape}.")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{name} has non-finite entries.")
    return m


def symmetrize(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def min_eigenvalue(m) -> float:
    """
    Smallest eigenvalue of the symmetric part (M + M^T)/2.

    Parameters:
        m (array_like): Square matrix, expected symmetric up to roundoff.

    Returns:
        float: The smallest eigenvalue.
    """
    m = as_finite_matrix(m)
    return float(linalg.eigvalsh(symmetrize(m))[0])


def loewner_geq(x, y, tol: float = DEFAULT_LOEWNER_TOL) -> bool:
    """
    True iff x - y is positive semidefinite up to tol, i.e. x >= y in Loewner order.
    """
    x = as_finite_matrix(x, "x")
    y = as_finite_matrix(y, "y")
    if x.shape != y.shape:
        raise InvalidInputError(f"Dimension mismatch: {x.shape} vs {y.shape}.")
    if tol < 0:
        raise InvalidInputError("tol must be non-negative.")
    return min_eigenvalue(x - y) >= -tol


def cholesky_lower(cov) -> np.ndarray:
    """
    Lower Cholesky factor of a covariance matrix.

    Raises:
        DecompositionError: If cov is not positive definite.
    """
    cov = as_finite_matrix(cov, "covariance") if np.isrealobj(cov) else np.asarray(cov)
    try:
        return linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as e:
        raise DecompositionError(f"Covariance is not positive definite: {e}") from e


def spd_factor(a, name: str = "A"):
    """
    Cholesky factor of a symmetric positive definite matrix, for repeated solves.

    Raises:
        ConditioningError: If a is not positive definite or cond(a) exceeds 1e12.
    """
    a = as_finite_matrix(a, name)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ConditioningError(f"{name} is ill-conditioned (cond={cond:.3g}).")
    try:
        return linalg.cho_factor(symmetrize(a), lower=True)
    except linalg.LinAlgError as e:
        raise ConditioningError(f"{name} is not positive definite: {e}") from e


def spd_solve(a, b, name: str = "A") -> np.ndarray:
    """
    Solves a X = b for symmetric positive definite a by Cholesky, never forming a^-1.

    Raises:
        ConditioningError: If a is not positive definite or cond(a) exceeds 1e12.
    """
    return linalg.cho_solve(spd_factor(a, name), np.asarray(b, dtype=float))


def spd_inverse(a, name: str = "A") -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return symmetrize(spd_solve(a, np.eye(a.shape[0]), name))
