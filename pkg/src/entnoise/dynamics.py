"""Two-mode Gaussian generator assembly and exact covariance propagation.

The reduced evolution of the coupled oscillators is Gaussian: a drift matrix
x = -H Delta_2 from the (level-shifted) quadratic Hamiltonian and a diffusion
matrix y = -Delta_2 chi Y chi^T Delta_2 from the screen. Covariances obey

    dgamma/dt = x^T gamma + gamma x + y

whose solution gamma(t) = Y_t + X_t^T gamma(0) X_t, with X_t = exp(x t) and
Y_t the accumulated-noise integral, is evaluated here without time stepping.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import EhrenfestViolation, PhysicsRejection
from .phasespace import CHI, DELTA_2, TOL_PSD, TOL_SYM, min_eig_hermitian
from .screens import ScreenMoments

# Nodes per quadrature panel for the accumulated-noise integral. The
# integrand is trigonometric with period ~2*pi in these units, so panels
# never span more than one period and 32-node Gauss-Legendre resolves each
# panel to machine precision.
_GL_NODES = 32
_PANEL_LENGTH = 2.0 * np.pi


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Unit oscillators plus level shifts on x^2 and an x_a x_b coupling."""

    nu_a: float = 0.0
    nu_b: float = 0.0
    g: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        H = np.eye(4)
        H[0, 0] += self.nu_a
        H[2, 2] += self.nu_b
        H[0, 2] = H[2, 0] = self.g
        return H

    def without_shifts(self) -> "QuadraticHamiltonian":
        return QuadraticHamiltonian(0.0, 0.0, self.g)


@dataclass(frozen=True)
class GaussianDynamics:
    """Immutable (drift, diffusion, Hamiltonian) triple."""

    drift: np.ndarray
    diffusion: np.ndarray
    hamiltonian: QuadraticHamiltonian

    @property
    def g(self) -> float:
        return self.hamiltonian.g


def drift_from_hamiltonian(ham: QuadraticHamiltonian) -> np.ndarray:
    return -ham.matrix @ DELTA_2


def diffusion_from_Y(Y: np.ndarray) -> np.ndarray:
    return -DELTA_2 @ CHI @ np.asarray(Y, dtype=float) @ CHI.T @ DELTA_2


def build_dynamics(moments: ScreenMoments, include_shifts: bool = True) -> GaussianDynamics:
    """Assemble drift and diffusion from screen moments.

    The coupling is identified with the screen's eta coefficient. Refuses
    screens whose Ehrenfest defect is nonzero (their mean dynamics would not
    follow a single classical Hamiltonian) or whose diffusion is not PSD.
    """
    if abs(moments.xi) > TOL_SYM:
        raise EhrenfestViolation(
            f"screen has Ehrenfest defect xi = {moments.xi:.3e}; "
            "mean dynamics are inconsistent, refusing to build a generator"
        )
    lam = min_eig_hermitian(moments.Y)
    if lam < -TOL_PSD:
        raise PhysicsRejection(f"diffusion matrix Y is not PSD (min eigenvalue {lam:.3e})")
    nu_a = moments.nu_a if include_shifts else 0.0
    nu_b = moments.nu_b if include_shifts else 0.0
    ham = QuadraticHamiltonian(nu_a=nu_a, nu_b=nu_b, g=moments.eta)
    return GaussianDynamics(
        drift=drift_from_hamiltonian(ham),
        diffusion=diffusion_from_Y(moments.Y),
        hamiltonian=ham,
    )


def _gl_panels(t: float):
    """Gauss-Legendre nodes and weights over [0, t], split into <=2*pi panels."""
    base_x, base_w = np.polynomial.legendre.leggauss(_GL_NODES)
    n_panels = max(1, int(np.ceil(t / _PANEL_LENGTH)))
    edges = np.linspace(0.0, t, n_panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(half * (base_x + 1.0) + lo)
        weights.append(half * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def accumulated_noise(dyn: GaussianDynamics, t: float) -> np.ndarray:
    """Y_t = integral_0^t X_u^T y X_u du by fixed high-order quadrature."""
    if t == 0.0:
        return np.zeros((4, 4))
    nodes, weights = _gl_panels(t)
    Y = np.zeros((4, 4))
    for u, w in zip(nodes, weights):
        X = expm(dyn.drift * u)
        Y += w * (X.T @ dyn.diffusion @ X)
    return 0.5 * (Y + Y.T)


def propagate(gamma0: np.ndarray, dyn: GaussianDynamics, t: float) -> np.ndarray:
    """gamma(t) = Y_t + X_t^T gamma(0) X_t for t >= 0."""
    if not np.isfinite(t):
        raise ValueError(f"propagation time must be finite, got {t}")
    if t < 0:
        raise ValueError(
            "propagate requires t >= 0; run the reversible part backwards "
            "with propagate_reversible instead"
        )
    gamma0 = np.asarray(gamma0, dtype=float)
    if t == 0.0:
        return gamma0.copy()
    X = expm(dyn.drift * t)
    gamma = accumulated_noise(dyn, t) + X.T @ gamma0 @ X
    return 0.5 * (gamma + gamma.T)


def propagate_reversible(gamma0: np.ndarray, dyn: GaussianDynamics, t: float) -> np.ndarray:
    """Drop the diffusion: exp(x^T t) gamma(0) exp(x t). Valid for any sign of t."""
    gamma0 = np.asarray(gamma0, dtype=float)
    X = expm(dyn.drift * t)
    gamma = X.T @ gamma0 @ X
    return 0.5 * (gamma + gamma.T)


def _check_uniform_grid(times: np.ndarray) -> float:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("times must be a 1d grid with at least two points")
    steps = np.diff(times)
    if times[0] != 0.0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("times must be uniform and start at 0")
    return float(steps[0])


def iter_grid_segments(
    gamma0: np.ndarray, dyn: GaussianDynamics, times: np.ndarray, chunk: int = 512
):
    """Yield (start, stop, gammas) segments of the grid trajectory in order.

    Lets scans abort early without paying for the rest of the grid; the
    recurrence state carries over between segments.
    """
    dt = _check_uniform_grid(times)
    gamma0 = np.asarray(gamma0, dtype=float)
    X_step = expm(dyn.drift * dt)
    Y_step = accumulated_noise(dyn, dt)
    Y_k = np.zeros((4, 4))
    X_k = np.eye(4)
    n = np.asarray(times).size
    start = 0
    while start < n:
        stop = min(start + chunk, n)
        seg = np.empty((stop - start,) + gamma0.shape)
        for i in range(start, stop):
            if i == 0:
                seg[0] = gamma0
                continue
            Y_k = Y_step + X_step.T @ Y_k @ X_step
            X_k = X_k @ X_step
            seg[i - start] = Y_k + (X_k.T @ gamma0) @ X_k
        yield start, stop, seg
        start = stop


def propagate_grid(gamma0: np.ndarray, dyn: GaussianDynamics, times: np.ndarray) -> np.ndarray:
    """Evaluate gamma(t) on a uniform time grid starting at 0.

    Uses the one-step recurrence Y_{k+1} = Y_step + X_step^T Y_k X_step, so
    the cost is one quadrature plus two 4x4 products per grid point.
    gamma0 may carry leading batch dimensions (..., 4, 4); the returned array
    has shape (len(times), ..., 4, 4).
    """
    gamma0 = np.asarray(gamma0, dtype=float)
    times = np.asarray(times, dtype=float)
    out = np.empty(times.shape + gamma0.shape)
    for start, stop, seg in iter_grid_segments(gamma0, dyn, times, chunk=4096):
        out[start:stop] = seg
    return out
