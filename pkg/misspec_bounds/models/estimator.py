from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np


class Target(Enum):
    PSEUDO_TRUE = "pseudo_true"
    TRUE_PARAM = "true_param"


@dataclass(frozen=True)
class Estimator:
    """
    A named, deterministic map from observations to parameter estimates.

    The map accepts a single observation of shape (N,) or a batch (n, N) and
    returns (k,) or (n, k) accordingly. Trials the map cannot resolve (an
    optimizer that did not converge) come back as rows of NaN.

    Attributes:
        name (str): Label used in tables and logs.
        map (Callable[[np.ndarray], np.ndarray]): The estimator itself.
        target (Target): Whether it estimates theta*_0 or the true parameter.
    """
    name: str
    map: Callable[[np.ndarray], np.ndarray]
    target: Target = Target.PSEUDO_TRUE

    def __call__(self, x) -> np.ndarray:
        return self.map(np.asarray(x))
