"""Phase-space primitives for two coupled oscillator modes.

Quadratures are ordered (x_a, p_a, x_b, p_b) and covariance matrices use the
symmetrized second-moment convention in which the two-mode vacuum is the
identity (hbar = m = omega = 1 throughout the dimensionless modules).
"""

from typing import NamedTuple

import numpy as np

# Default tolerances. Double-precision eigensolves on 4x4 matrices are
# accurate to ~1e-14, so these sit two orders above the noise floor.
TOL_SYM = 1e-12
TOL_PSD = 1e-10

# diag(1, 1, 1, -1): momentum reversal of mode b.
K_REVERSAL = np.diag([1.0, 1.0, 1.0, -1.0])


class Certificate(NamedTuple):
    """Boolean decision together with the eigenvalue that certifies it."""

    ok: bool
    min_eigenvalue: float


def symplectic_form(n: int) -> np.ndarray:
    """Block-diagonal 2n x 2n form with [[0, 1], [-1, 0]] per mode."""
    if n < 1:
        raise ValueError(f"mode count must be a positive integer, got {n}")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * n, 2 * n))
    for i in range(n):
        out[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = block
    return out


DELTA_1 = symplectic_form(1)
DELTA_2 = symplectic_form(2)
# Momentum-reversed two-mode form, K Delta_2 K.
DELTA_2_TILDE = K_REVERSAL @ DELTA_2 @ K_REVERSAL

# 4x2 selector selecting (x_a, x_b): defines which system quadratures are
# touched by the exchange channel.
CHI = np.zeros((4, 2))
CHI[0, 0] = 1.0
CHI[2, 1] = 1.0


def require_symmetric(matrix: np.ndarray, tol: float = TOL_SYM, name: str = "matrix") -> None:
    """Raise ValueError naming the worst entry pair if ``matrix`` is not symmetric."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name} must be square, got shape {matrix.shape}")
    defect = np.abs(matrix - matrix.T)
    worst = np.unravel_index(np.argmax(defect), defect.shape)
    if defect[worst] > tol:
        i, j = worst
        raise ValueError(
            f"{name} is not symmetric: entries ({i},{j}) and ({j},{i}) "
            f"differ by {defect[worst]:.3e} (tol {tol:.1e})"
        )


def min_eig_hermitian(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Single certified PSD primitive: every positivity decision in the package
    routes through this call so tolerance semantics stay uniform.
    """
    return float(np.linalg.eigvalsh(matrix)[0])


def validate_covariance(
    gamma: np.ndarray, tol_sym: float = TOL_SYM, tol_psd: float = TOL_PSD
) -> Certificate:
    """Check the uncertainty principle, gamma + i Delta_2 >= 0.

    Returns a Certificate carrying the minimum eigenvalue of the Hermitian
    matrix gamma + i Delta_2; the state is physical iff that eigenvalue is
    >= -tol_psd. Raises ValueError on non-symmetric input.
    """
    gamma = np.asarray(gamma, dtype=float)
    require_symmetric(gamma, tol_sym, name="covariance matrix")
    if gamma.shape[0] % 2:
        raise ValueError(f"covariance must be 2n x 2n, got shape {gamma.shape}")
    n = gamma.shape[0] // 2
    lam = min_eig_hermitian(gamma + 1j * symplectic_form(n))
    return Certificate(lam >= -tol_psd, lam)


def partial_reverse(gamma: np.ndarray) -> np.ndarray:
    """Flip the sign of p_b rows and columns: K gamma K with K = diag(1,1,1,-1)."""
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (4, 4):
        raise ValueError(f"partial reversal is defined for 4x4 matrices, got {gamma.shape}")
    return K_REVERSAL @ gamma @ K_REVERSAL
