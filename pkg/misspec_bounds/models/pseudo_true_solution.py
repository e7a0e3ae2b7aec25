from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PseudoTrueSolution:
    """
    Result of maximizing E_p[log f(x; theta)] over the assumed parameters.

    Attributes:
        theta_star (np.ndarray): Maximizer, length N2.
        objective_value (float): Objective at theta_star.
        converged (bool): Whether the gradient-norm tolerance was met.
        iterations (int): Newton/gradient iterations used.
        gradient_norm (float): Final objective gradient norm.
        method (str): "analytic" or "monte_carlo".
    """
    theta_star: np.ndarray
    objective_value: float
    converged: bool
    iterations: int
    gradient_norm: float = 0.0
    method: str = "analytic"
