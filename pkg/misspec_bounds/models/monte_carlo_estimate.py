from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MonteCarloEstimate:
    """
    A sample average together with its standard error.

    Attributes:
        value (np.ndarray): Scalar, vector or matrix estimate.
        std_error (np.ndarray): Entrywise standard error, same shape as value.
        n_samples (int): Number of averaged samples.
    """
    value: np.ndarray
    std_error: np.ndarray
    n_samples: int

    def z_scores(self, reference) -> np.ndarray:
        """
        Entrywise |value - reference| / std_error.

        Entries with zero standard error score 0 when they match the reference
        exactly and infinity otherwise.
        """
        diff, se = np.broadcast_arrays(
            np.abs(np.asarray(self.value, dtype=float) - np.asarray(reference, dtype=float)),
            np.asarray(self.std_error, dtype=float),
        )
        z = np.where(diff == 0, 0.0, np.inf)
        positive = se > 0
        z[positive] = diff[positive] / se[positive]
        return z
