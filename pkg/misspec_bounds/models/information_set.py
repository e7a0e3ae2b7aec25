from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class InformationSet:
    """
    The four information matrices at (theta*_0, vartheta_0), expectations under p.

    Attributes:
        A (np.ndarray): -E_p[hessian of log f], N2 x N2.
        B (np.ndarray): E_p[score_f^T score_f], N2 x N2.
        B_pf (np.ndarray): E_p[score_f^T score_p], N2 x N1.
        J_p (np.ndarray): True-model Fisher information, N1 x N1.
        method (str): "analytic" or "monte_carlo".
        A_se, B_se, B_pf_se, J_p_se (Optional[np.ndarray]): Entrywise
            standard errors, present for Monte Carlo estimates only.
        n_samples (int): Sample count behind a Monte Carlo estimate, 0 otherwise.
    """
    A: np.ndarray
    B: np.ndarray
    B_pf: np.ndarray
    J_p: np.ndarray
    method: str = "analytic"
    A_se: Optional[np.ndarray] = None
    B_se: Optional[np.ndarray] = None
    B_pf_se: Optional[np.ndarray] = None
    J_p_se: Optional[np.ndarray] = None
    n_samples: int = 0

    @property
    def assumed_dim(self) -> int:
        return self.A.shape[0]

    @property
    def true_dim(self) -> int:
        return self.J_p.shape[0]
