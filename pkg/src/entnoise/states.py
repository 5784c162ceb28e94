"""Covariance-matrix constructors for common Gaussian states."""

import numpy as np


def vacuum_cov(n_modes: int = 2) -> np.ndarray:
    return np.eye(2 * n_modes)


def thermal_cov(nbar: float, n_modes: int = 1) -> np.ndarray:
    return (2.0 * nbar + 1.0) * np.eye(2 * n_modes)


def squeezed_cov(r: float) -> np.ndarray:
    """One-mode squeezed vacuum, diag(e^{2r}, e^{-2r})."""
    return np.diag([np.exp(2 * r), np.exp(-2 * r)])


def two_mode_squeezed_cov(r: float) -> np.ndarray:
    """Two-mode squeezed vacuum; entangled for any r != 0."""
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    off = np.diag([s, -s])
    return np.block([[c * np.eye(2), off], [off, c * np.eye(2)]])


def direct_sum(gamma_a: np.ndarray, gamma_b: np.ndarray) -> np.ndarray:
    """Covariance of a product state from its one-mode blocks."""
    gamma_a = np.asarray(gamma_a, dtype=float)
    gamma_b = np.asarray(gamma_b, dtype=float)
    out = np.zeros((gamma_a.shape[0] + gamma_b.shape[0],) * 2)
    out[: gamma_a.shape[0], : gamma_a.shape[0]] = gamma_a
    out[gamma_a.shape[0] :, gamma_a.shape[0] :] = gamma_b
    return out
