"""
Half-wavelength uniform linear array centred at the origin.

Sensor m (1-based) sits at offset d_m = m - (M + 1)/2 wavelengths/2, so the
array is centro-symmetric and a(phi)^H a'(phi) = 0 for every phi.
"""
import numpy as np
from scipy import linalg


def sensor_offsets(M: int) -> np.ndarray:
    if M < 2:
        raise ValueError("An array needs at least two sensors.")
    return np.arange(1, M + 1) - (M + 1) / 2.0


def steering_vector(phi, M: int) -> np.ndarray:
    """
    a_m(phi) = exp(j pi d_m sin(phi)).

    Parameters:
        phi (float or np.ndarray): Direction(s) of arrival in radians.
        M (int): Number of sensors.

    Returns:
        np.ndarray: Shape phi.shape + (M,).
    """
    phi = np.asarray(phi, dtype=float)
    return np.exp(1j * np.pi * np.multiply.outer(np.sin(phi), sensor_offsets(M)))


def steering_derivative(phi, M: int) -> np.ndarray:
    """da/dphi = j pi d cos(phi) a."""
    phi = np.asarray(phi, dtype=float)
    factor = 1j * np.pi * np.multiply.outer(np.cos(phi), sensor_offsets(M))
    return factor * steering_vector(phi, M)


def steering_second_derivative(phi, M: int) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    d = sensor_offsets(M)
    first = 1j * np.pi * np.multiply.outer(np.cos(phi), d)
    second = -1j * np.pi * np.multiply.outer(np.sin(phi), d)
    return (first**2 + second) * steering_vector(phi, M)


def toeplitz_covariance(M: int, sigma2: float, rho: float) -> np.ndarray:
    """Sigma_ij = sigma2 * rho^|i - j|; rho = 0 gives sigma2 * I."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive.")
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1).")
    return sigma2 * linalg.toeplitz(np.power(float(rho), np.arange(M)))
