from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProportionalScoreFit:
    """
    Least-squares W with score_assumed ~ W score_equivalent over probe draws.

    Attributes:
        w_matrix (np.ndarray): Fitted N2 x N2 matrix.
        max_residual (float): Largest per-sample residual norm of the fit.
        n_probe (int): Number of probe observations used.
    """
    w_matrix: np.ndarray
    max_residual: float
    n_probe: int
