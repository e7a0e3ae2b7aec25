from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoundReport:
    """
    Oracle CRB, MCRB and naive MCRB for one operating point.

    Attributes:
        crb (np.ndarray): J_p^-1, N1 x N1.
        mcrb (np.ndarray): A^-1 B A^-1, N2 x N2.
        nmcrb (np.ndarray): A^-1 B_pf J_p^-1 B_pf^T A^-1, N2 x N2.
        order_ok (bool): mcrb >= nmcrb in Loewner order within tol.
        min_gap_eig (float): Smallest eigenvalue of mcrb - nmcrb.
    """
    crb: np.ndarray
    mcrb: np.ndarray
    nmcrb: np.ndarray
    order_ok: bool
    min_gap_eig: float
