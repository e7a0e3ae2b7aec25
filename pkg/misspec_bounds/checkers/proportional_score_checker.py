from typing import Tuple

import numpy as np
from scipy import linalg

from misspec_bounds.errors import ConditioningError, InvalidInputError
from misspec_bounds.models.proportional_score_fit import ProportionalScoreFit

DEFAULT_RESIDUAL_TOL = 1e-12


def fit_proportional_score(source_scores, target_scores) -> ProportionalScoreFit:
    """
    Least-squares W with target ~ W source, one score vector per row.

    The residual is the largest per-sample norm of target - W source, relative
    to max(1, largest target norm).

    Raises:
        ConditioningError: If the source scores do not span the parameter space.
    """
    source = np.atleast_2d(np.asarray(source_scores, dtype=float))
    target = np.atleast_2d(np.asarray(target_scores, dtype=float))
    if source.shape[0] != target.shape[0]:
        raise InvalidInputError("Source and target must hold the same number of samples.")
    w_t, _, rank, _ = linalg.lstsq(source, target)
    if rank < source.shape[1]:
        raise ConditioningError(f"Probe scores have rank {rank} < {source.shape[1]}.")
    residual = np.linalg.norm(target - source @ w_t, axis=1)
    scale = max(1.0, float(np.max(np.linalg.norm(target, axis=1))))
    return ProportionalScoreFit(
        w_matrix=np.atleast_2d(w_t.T),
        max_residual=float(np.max(residual)) / scale,
        n_probe=source.shape[0],
    )


def check_proportional_score(
    fit: ProportionalScoreFit,
    expected_w=None,
    tol: float = DEFAULT_RESIDUAL_TOL,
) -> Tuple[bool, str]:
    """
    Checks that a fit is exact and, when given, equal to expected_w.

    Returns:
        Tuple[bool, str]: Verdict and the fitted W with its residual.
    """
    detail = f"W={np.array2string(fit.w_matrix, precision=12)} residual={fit.max_residual:.3e}"
    if fit.max_residual >= tol:
        return False, detail
    if expected_w is not None:
        expected = np.broadcast_to(np.asarray(expected_w, dtype=float), fit.w_matrix.shape)
        if not np.allclose(fit.w_matrix, expected, rtol=1e-10, atol=tol):
            return False, detail
    return True, detail
