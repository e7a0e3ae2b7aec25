from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from misspec_bounds.errors import DomainError, InvalidInputError

FD_STEP = 1e-5
FD_TOL = 1e-8


@dataclass(frozen=True)
class GFunction:
    """
    Auxiliary function g used to build a pointwise-equivalent density.

    The raw function is divided by its value at 1 on construction, so the
    stored function always satisfies g(1) = 1 and the normalizing constant of
    the equivalent density is exactly 1 at the operating point.

    Attributes:
        name (str): Registry name.
        raw (Callable): g as given, positive on z > 0.
        raw_prime (Callable): Its derivative.
        g_at_one (float): raw(1), the normalization divisor.
        g_prime_at_one (float): Derivative of the normalized g at 1.
    """
    name: str
    raw: Callable[[np.ndarray], np.ndarray]
    raw_prime: Callable[[np.ndarray], np.ndarray]
    g_at_one: float = field(init=False)
    g_prime_at_one: float = field(init=False)

    def __post_init__(self):
        g1 = float(self.raw(1.0))
        if not np.isfinite(g1) or g1 <= 0:
            raise InvalidInputError(f"g '{self.name}' must be positive at 1, got {g1}.")
        gp1 = float(self.raw_prime(1.0))
        fd = (float(self.raw(1.0 + FD_STEP)) - float(self.raw(1.0 - FD_STEP))) / (2 * FD_STEP)
        if abs(fd - gp1) > FD_TOL * max(1.0, abs(gp1)):
            raise InvalidInputError(
                f"g' of '{self.name}' disagrees with finite differences at 1: {gp1} vs {fd}."
            )
        if gp1 == 0:
            raise InvalidInputError(f"g '{self.name}' has g'(1) = 0.")
        object.__setattr__(self, "g_at_one", g1)
        object.__setattr__(self, "g_prime_at_one", gp1 / g1)

    def __call__(self, z) -> np.ndarray:
        value = np.asarray(self.raw(np.asarray(z, dtype=float)), dtype=float) / self.g_at_one
        if np.any(value <= 0) or not np.all(np.isfinite(value)):
            raise DomainError(f"g '{self.name}' is not positive and finite on the given input.")
        return value

    def log(self, z) -> np.ndarray:
        return np.log(self(z))

    def prime(self, z) -> np.ndarray:
        return np.asarray(self.raw_prime(np.asarray(z, dtype=float)), dtype=float) / self.g_at_one
