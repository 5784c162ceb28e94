"""Brute-force oracle on truncated Fock spaces.

Simulates the microscopic exchange circuit (local rotation, +-sqrt(tau)
carrier gates sandwiching the screen, carrier reset) as dense linear algebra
and exposes covariance extraction, generator-coefficient extraction, and the
gate-identity check. Everything the Gaussian-level modules compute in closed
form is re-derived here from the circuit, so agreement is a real test.

The carrier gates exp(-i sqrt(tau) x_f A) are controlled displacements: in
the joint eigenbasis of A = x_a and B = x_b the whole reduced step becomes an
entrywise multiplier C = Xi Xi^dag assembled from carrier-space vectors. That
is algebraically identical to exponentiating the truncated operators
directly (the gates block-diagonalize over the system eigenbasis), but costs
O((d_a d_b)^2) instead of a dense three-mode product. A literal three-mode
implementation is kept for cross-checking the fast path at small dimension.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .screens import (
    DEFAULT_ETA_CONVENTION,
    DisplacementScreen,
    KrausScreen,
    ScreenMoments,
)

# --- single-mode operators ---


def ladder(d: int) -> np.ndarray:
    """Annihilation operator truncated to d levels."""
    a = np.zeros((d, d), dtype=complex)
    ns = np.arange(1, d)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def position(d: int) -> np.ndarray:
    a = ladder(d)
    return ((a + a.conj().T) / np.sqrt(2)).real.astype(float)


def momentum(d: int) -> np.ndarray:
    a = ladder(d)
    return 1j * (a.conj().T - a) / np.sqrt(2)


def number(d: int) -> np.ndarray:
    return np.diag(np.arange(d, dtype=float))


def coherent_vector(alpha: complex, d: int) -> np.ndarray:
    """Truncated coherent state, renormalized on the truncated space."""
    if alpha == 0:
        return np.eye(d, dtype=complex)[:, 0]
    ns = np.arange(d)
    log_fact = np.cumsum(np.log(np.maximum(ns, 1)))
    vec = np.exp(-0.5 * abs(alpha) ** 2 + ns * np.log(complex(alpha)) - 0.5 * log_fact)
    return vec / np.linalg.norm(vec)


def squeezed_vector(r: float, d: int) -> np.ndarray:
    """Truncated single-mode squeezed vacuum exp(r(a^2 - a^dag^2)/2)|0>."""
    a = ladder(d)
    gen = 0.5 * r * (a @ a - a.conj().T @ a.conj().T)
    vec = expm(gen)[:, 0]
    return vec / np.linalg.norm(vec)


# --- two-mode states ---


@dataclass(frozen=True)
class FockState:
    """Dense two-mode density matrix with its truncation dimensions."""

    rho: np.ndarray
    dims: tuple
    notes: tuple = field(default_factory=tuple)

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def with_note(self, note: str) -> "FockState":
        return FockState(self.rho, self.dims, self.notes + (note,))


def product_state(vec_a: np.ndarray, vec_b: np.ndarray) -> FockState:
    psi = np.kron(np.asarray(vec_a, dtype=complex), np.asarray(vec_b, dtype=complex))
    return FockState(rho=np.outer(psi, psi.conj()), dims=(len(vec_a), len(vec_b)))


def vacuum_state(dims=(20, 20)) -> FockState:
    da, db = dims
    va = np.zeros(da, dtype=complex)
    va[0] = 1.0
    vb = np.zeros(db, dtype=complex)
    vb[0] = 1.0
    return product_state(va, vb)


def covariance_of(state: FockState) -> np.ndarray:
    """gamma_ij = <{M_i, M_j}> - 2 <M_i><M_j> for M = (x_a, p_a, x_b, p_b)."""
    da, db = state.dims
    ops = [
        np.kron(position(da), np.eye(db)),
        np.kron(momentum(da), np.eye(db)),
        np.kron(np.eye(da), position(db)),
        np.kron(np.eye(da), momentum(db)),
    ]
    rho = state.rho
    means = np.array([np.trace(rho @ op) for op in ops])
    gamma = np.empty((4, 4))
    for i in range(4):
        for j in range(i, 4):
            anti = np.trace(rho @ (ops[i] @ ops[j] + ops[j] @ ops[i]))
            gamma[i, j] = gamma[j, i] = anti.real - 2.0 * (means[i] * means[j]).real
    return gamma


# --- screens realized on the truncated carrier ---


def displacement_operator(u: float, v: float, d: int) -> np.ndarray:
    """Unitary shifting x by u and p by v: exp(alpha a^dag - conj(alpha) a)."""
    alpha = (u + 1j * v) / np.sqrt(2)
    a = ladder(d)
    return expm(alpha * a.conj().T - np.conj(alpha) * a)


def gauss_hermite_mixture(screen: DisplacementScreen, n_nodes: int = 21):
    """Finite mixture of displacements matching the screen's Gaussian moments.

    Gauss-Hermite nodes along the principal axes of Sigma; weights sum to one
    exactly, so trace preservation is exact. Returns (weights, shifts) with
    shifts[j] = (u_j, v_j).
    """
    sigma = screen.matrix
    vals, vecs = np.linalg.eigh(sigma)
    vals = np.maximum(vals, 0.0)
    axes = []
    for lam in vals:
        if lam <= 0.0:
            axes.append((np.array([1.0]), np.array([0.0])))
        else:
            nodes, weights = np.polynomial.hermite.hermgauss(n_nodes)
            axes.append((weights / np.sqrt(np.pi), np.sqrt(2.0 * lam) * nodes))
    w = np.outer(axes[0][0], axes[1][0]).ravel()
    grid = np.stack(np.meshgrid(axes[0][1], axes[1][1], indexing="ij"), axis=-1).reshape(-1, 2)
    shifts = grid @ vecs.T  # back from principal axes to (u, v)
    keep = w > 1e-16
    w = w[keep] / w[keep].sum()
    return w, shifts[keep]


def carrier_kraus_ops(screen, d: int, n_nodes: int = 21):
    """Kraus operators of a screen on the d-level carrier (identity = None)."""
    if screen is None:
        return [np.eye(d, dtype=complex)]
    if isinstance(screen, DisplacementScreen):
        weights, shifts = gauss_hermite_mixture(screen, n_nodes)
        return [
            np.sqrt(wj) * displacement_operator(u, v, d) for wj, (u, v) in zip(weights, shifts)
        ]
    if isinstance(screen, KrausScreen):
        if screen.dim != d:
            raise ValueError(f"KrausScreen was built for dim {screen.dim}, carrier has {d}")
        return list(screen.kraus_ops)
    raise TypeError(f"unsupported screen type {type(screen).__name__}")


def amplitude_damping_kraus(transmissivity: float, d: int) -> KrausScreen:
    """Standard bosonic loss channel; violates mean preservation."""
    eta = float(transmissivity)
    if not 0.0 < eta <= 1.0:
        raise ValueError("transmissivity must be in (0, 1]")
    ops = []
    for k in range(d):
        K = np.zeros((d, d), dtype=complex)
        for n in range(k, d):
            K[n - k, n] = np.sqrt(math.comb(n, k) * eta ** (n - k) * (1 - eta) ** k)
        if np.any(K):
            ops.append(K)
    return KrausScreen(kraus_ops=tuple(ops), dim=d)


# --- the reduced exchange step ---


def _phase_gates(scaled_vals: np.ndarray, herm_op: np.ndarray) -> np.ndarray:
    """Stack of exp(-i c_k herm_op) for every c_k, via one eigendecomposition."""
    lam, V = np.linalg.eigh(herm_op)
    phases = np.exp(-1j * np.outer(scaled_vals, lam))
    return np.einsum("mk,ck,nk->cmn", V, phases, V.conj())


class TrotterStepper:
    """Precomputed one-step superoperator of the exchange circuit.

    One step of length tau applies the local rotation, the sqrt(tau) carrier
    gates with the screen in the middle, and traces the carrier (Markovian
    reset to rho_f). The step acts on two-mode density matrices as a basis
    change into the joint position eigenbasis followed by an entrywise
    multiplier.
    """

    def __init__(
        self,
        screen,
        tau: float,
        dims=(20, 20),
        fc_dim: int = None,
        rho_f: np.ndarray = None,
        local_h=None,
        eta_convention: str = DEFAULT_ETA_CONVENTION,
        n_nodes: int = 21,
    ):
        if tau < 0:
            raise ValueError("step length must be nonnegative")
        self.tau = float(tau)
        self.dims = tuple(dims)
        da, db = self.dims
        df = fc_dim if fc_dim is not None else max(self.dims)
        self.fc_dim = df

        # joint position eigenbasis of the two system modes
        self.a_vals, self.W_a = np.linalg.eigh(position(da))
        self.b_vals, self.W_b = np.linalg.eigh(position(db))
        self.T = np.kron(self.W_a, self.W_b).astype(complex)

        # local unitary, applied first within each step
        if local_h is None:
            ph_a = np.exp(-1j * self.tau * (np.arange(da) + 0.5))
            ph_b = np.exp(-1j * self.tau * (np.arange(db) + 0.5))
            u_loc = np.kron(ph_a, ph_b)
        else:
            H_a, H_b = local_h
            u_loc = np.kron(expm(-1j * self.tau * np.asarray(H_a, dtype=complex)),
                            expm(-1j * self.tau * np.asarray(H_b, dtype=complex)))
        self._local_diagonal = u_loc.ndim == 1
        self._u_loc = u_loc

        if self.tau == 0.0:
            self.multiplier = np.ones((da * db, da * db), dtype=complex)
            self.trace_defect = 0.0
            self._leak_row = np.zeros(da * db)
            return

        root = np.sqrt(self.tau)
        E = _phase_gates(root * self.a_vals, position(df))   # exp(-i sqrt(tau) a_alpha x_f)
        F = _phase_gates(root * self.b_vals, momentum(df))   # exp(-i sqrt(tau) b_beta p_f)

        if rho_f is None:
            fc_vecs = np.zeros((1, df), dtype=complex)
            fc_vecs[0, 0] = 1.0
            fc_weights = np.array([1.0])
        else:
            rho_f = np.asarray(rho_f, dtype=complex)
            vals, vecs = np.linalg.eigh(rho_f)
            keep = vals > 1e-14
            fc_weights = vals[keep] / vals[keep].sum()
            fc_vecs = vecs[:, keep].T

        kraus = np.stack(carrier_kraus_ops(screen, df, n_nodes))
        if eta_convention == "positive":
            inner, outer = F, E   # apply p-gate, then x-gate; reverse after the screen
        elif eta_convention == "negative":
            inner, outer = E, F
        else:
            raise ValueError(f"unknown eta convention {eta_convention!r}")

        def in_gates(vec):
            # returns (da, db, df): inner gate indexed by its own mode
            if eta_convention == "positive":
                phi = np.einsum("bmn,n->bm", inner, vec)
                return np.einsum("amn,bn->abm", outer, phi)
            phi = np.einsum("amn,n->am", inner, vec)
            return np.einsum("bmn,an->abm", outer, phi)

        blocks = []
        leak = 0.0
        for wk, vec in zip(fc_weights, fc_vecs):
            phi_in = in_gates(vec)                                   # (da, db, df)
            phi_s = np.einsum("jmn,abn->jabm", kraus, phi_in)        # screen branches
            if eta_convention == "positive":
                phi_s = np.einsum("bnm,jabn->jabm", inner.conj(), phi_s)
                phi_s = np.einsum("anm,jabn->jabm", outer.conj(), phi_s)
            else:
                phi_s = np.einsum("anm,jabn->jabm", inner.conj(), phi_s)
                phi_s = np.einsum("bnm,jabn->jabm", outer.conj(), phi_s)
            xi = np.sqrt(wk) * np.transpose(phi_s, (1, 2, 0, 3))     # (da, db, j, df)
            leak = leak + np.sum(np.abs(xi[..., -2:]) ** 2, axis=(-2, -1)).reshape(da * db)
            blocks.append(xi.reshape(da * db, -1))

        Xi = np.concatenate(blocks, axis=1)
        self.multiplier = Xi @ Xi.conj().T
        self.trace_defect = float(np.max(np.abs(np.diagonal(self.multiplier).real - 1.0)))
        self._leak_row = leak

    def _apply_local(self, rho: np.ndarray) -> np.ndarray:
        if self._local_diagonal:
            return rho * np.outer(self._u_loc, self._u_loc.conj())
        return self._u_loc @ rho @ self._u_loc.conj().T

    def apply(self, rho: np.ndarray):
        """One step; returns (rho_out, leakage_estimate)."""
        rho = self._apply_local(rho)
        rho_eig = self.T.conj().T @ rho @ self.T
        leakage = float(np.real(np.diagonal(rho_eig)) @ self._leak_row)
        rho_eig = self.multiplier * rho_eig
        return self.T @ rho_eig @ self.T.conj().T, leakage


def reduced_step(
    rho_ab: FockState,
    screen,
    tau: float,
    local_h=None,
    rho_f: np.ndarray = None,
    eta_convention: str = DEFAULT_ETA_CONVENTION,
    n_nodes: int = 21,
    fc_dim: int = None,
) -> FockState:
    """Single circuit step of length tau followed by the carrier reset."""
    if tau == 0.0:
        return FockState(rho_ab.rho.copy(), rho_ab.dims, rho_ab.notes)
    stepper = TrotterStepper(
        screen, tau, dims=rho_ab.dims, fc_dim=fc_dim, rho_f=rho_f,
        local_h=local_h, eta_convention=eta_convention, n_nodes=n_nodes,
    )
    rho, leakage = stepper.apply(rho_ab.rho)
    out = FockState(rho, rho_ab.dims, rho_ab.notes)
    if leakage > 1e-4:
        out = out.with_note(
            f"carrier truncation leakage {leakage:.2e} exceeds 1e-4; "
            "increase the carrier dimension"
        )
    return out


def trotter_evolve(
    rho_ab: FockState,
    screen,
    t: float,
    n: int,
    local_h=None,
    rho_f: np.ndarray = None,
    eta_convention: str = DEFAULT_ETA_CONVENTION,
    n_nodes: int = 21,
    fc_dim: int = None,
) -> FockState:
    """n-fold composition of the reduced step with tau = t / n."""
    if n < 1:
        raise ValueError(f"need at least one step, got n = {n}")
    stepper = TrotterStepper(
        screen, t / n, dims=rho_ab.dims, fc_dim=fc_dim, rho_f=rho_f,
        local_h=local_h, eta_convention=eta_convention, n_nodes=n_nodes,
    )
    rho = rho_ab.rho
    worst_leak = 0.0
    for _ in range(n):
        rho, leakage = stepper.apply(rho)
        worst_leak = max(worst_leak, leakage)
    out = FockState(rho, rho_ab.dims, rho_ab.notes)
    if worst_leak > 1e-4:
        out = out.with_note(f"carrier truncation leakage up to {worst_leak:.2e}")
    return out


# --- gate identity ---


def _exchange_multiplier(tau: float, a_vals, b_vals, df: int, eta_convention: str):
    """Entrywise multiplier of the bare four-gate block (no screen, no local)."""
    root = np.sqrt(tau)
    E = _phase_gates(root * np.asarray(a_vals), position(df))
    F = _phase_gates(root * np.asarray(b_vals), momentum(df))
    vac = np.zeros(df, dtype=complex)
    vac[0] = 1.0
    if eta_convention == "positive":
        phi = np.einsum("bmn,n->bm", F, vac)
        phi = np.einsum("amn,bn->abm", E, phi)
        phi = np.einsum("bnm,abn->abm", F.conj(), phi)
        phi = np.einsum("anm,abn->abm", E.conj(), phi)
    else:
        phi = np.einsum("amn,n->am", E, vac)
        phi = np.einsum("bmn,an->abm", F, phi)
        phi = np.einsum("anm,abn->abm", E.conj(), phi)
        phi = np.einsum("bnm,abn->abm", F.conj(), phi)
    Xi = phi.reshape(len(a_vals) * len(b_vals), df)
    return Xi @ Xi.conj().T


def gate_identity_check(
    tau: float, d: int, test_states=None, eta_convention: str = DEFAULT_ETA_CONVENTION
) -> float:
    """Max trace distance between the four-gate block and the direct product gate.

    The block acts on system tensor vacuum-carrier and the carrier is traced;
    the target is exp(-i tau x_a x_b) applied directly (+i under the
    negative convention). Any deviation is pure truncation.
    """
    if test_states is None:
        test_states = [
            vacuum_state((d, d)),
            product_state(coherent_vector(0.6, d), coherent_vector(0.0, d)),
            product_state(coherent_vector(0.4, d), coherent_vector(-0.5j, d)),
        ]
    a_vals, W_a = np.linalg.eigh(position(d))
    b_vals, W_b = np.linalg.eigh(position(d))
    T = np.kron(W_a, W_b).astype(complex)

    circuit = _exchange_multiplier(tau, a_vals, b_vals, d, eta_convention)
    sign = -1.0 if eta_convention == "positive" else 1.0
    prods = np.multiply.outer(a_vals, b_vals).ravel()
    phases = np.exp(1j * sign * tau * prods)
    target = np.outer(phases, phases.conj())

    worst = 0.0
    for state in test_states:
        rho_eig = T.conj().T @ state.rho @ T
        diff = (circuit - target) * rho_eig
        # entrywise product of Hermitian matrices is Hermitian
        dist = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
        worst = max(worst, dist)
    return worst


# --- generator coefficient extraction ---


def _adjoint_apply(kraus_ops, op: np.ndarray) -> np.ndarray:
    return sum(K.conj().T @ op @ K for K in kraus_ops)


def moments_numeric(
    screen,
    rho_f: np.ndarray = None,
    dim: int = 30,
    n_nodes: int = 21,
    eta_convention: str = DEFAULT_ETA_CONVENTION,
) -> ScreenMoments:
    """Extract (nu_a, nu_b, eta, xi, Y) by applying the adjoint screen.

    Evaluates the adjoint channel on x, p, x^2, p^2, {x, p} and takes
    expectations in the carrier reference state (vacuum by default). This is
    the oracle side of the closed-form displacement moments.
    """
    kraus = carrier_kraus_ops(screen, dim, n_nodes)
    x = position(dim).astype(complex)
    p = momentum(dim)
    if rho_f is None:
        rho_f = np.zeros((dim, dim), dtype=complex)
        rho_f[0, 0] = 1.0
    else:
        rho_f = np.asarray(rho_f, dtype=complex)
        rho_f = rho_f / np.trace(rho_f).real

    def mean(op):
        return complex(np.trace(rho_f @ op))

    Sx = _adjoint_apply(kraus, x)
    Sp = _adjoint_apply(kraus, p)
    Sxx = _adjoint_apply(kraus, x @ x)
    Spp = _adjoint_apply(kraus, p @ p)
    Sxp = _adjoint_apply(kraus, x @ p + p @ x)

    mean_dx = mean(Sx - x)
    mean_dp = mean(Sp - p)
    nu_a = (-1j * mean(x @ Sx - Sx @ x)).real
    nu_b = (-1j * mean(p @ Sp - Sp @ p)).real
    c1 = (-1j * mean(Sx @ p - p @ Sx)).real
    c2 = (-1j * mean(x @ Sp - Sp @ x)).real
    base = 1.0 if eta_convention == "positive" else -1.0
    eta = base - (c1 - c2) / 2.0
    xi = 1.0 - (c1 + c2) / 2.0

    Y_xx = 2.0 * mean(Sxx + x @ x - x @ Sx - Sx @ x).real
    Y_pp = 2.0 * mean(Spp + p @ p - p @ Sp - Sp @ p).real
    Y_xp = mean(Sxp + (x @ p + p @ x) - (x @ Sp + Sp @ x) - (Sx @ p + p @ Sx)).real

    return ScreenMoments(
        nu_a=nu_a,
        nu_b=nu_b,
        eta=eta,
        xi=xi,
        Y=np.array([[Y_xx, Y_xp], [Y_xp, Y_pp]]),
        mean_defect_x=abs(mean_dx),
        mean_defect_p=abs(mean_dp),
    )


def mean_quadratures(state: FockState) -> np.ndarray:
    """<(x_a, p_a, x_b, p_b)> of a two-mode state."""
    da, db = state.dims
    ops = [
        np.kron(position(da), np.eye(db)),
        np.kron(momentum(da), np.eye(db)),
        np.kron(np.eye(da), position(db)),
        np.kron(np.eye(da), momentum(db)),
    ]
    return np.array([np.trace(state.rho @ op).real for op in ops])


def _displaced_vacuum(direction: int, delta: float, dims) -> FockState:
    """Vacuum displaced by delta along one quadrature direction."""
    da, db = dims
    alphas = {0: (delta / np.sqrt(2), 0), 1: (1j * delta / np.sqrt(2), 0),
              2: (0, delta / np.sqrt(2)), 3: (0, 1j * delta / np.sqrt(2))}[direction]
    return product_state(coherent_vector(alphas[0], da), coherent_vector(alphas[1], db))


def _mean_step_matrix(stepper: TrotterStepper, dims, delta: float = 0.5) -> np.ndarray:
    """The linear map on quadrature means of one reduced step.

    Gaussian channels act linearly on means, so finite displacements probe
    the map exactly (up to truncation).
    """
    base, _ = stepper.apply(vacuum_state(dims).rho)
    base_mean = mean_quadratures(FockState(base, dims))
    cols = []
    for k in range(4):
        rho, _ = stepper.apply(_displaced_vacuum(k, delta, dims).rho)
        cols.append((mean_quadratures(FockState(rho, dims)) - base_mean) / delta)
    return np.stack(cols, axis=1)


def extract_generator(
    screen,
    tau: float = 0.02,
    dims=(14, 14),
    rho_f: np.ndarray = None,
    eta_convention: str = DEFAULT_ETA_CONVENTION,
    n_nodes: int = 21,
):
    """Drift and diffusion of the circuit's continuous-time limit.

    Richardson-extrapolates (step - identity)/tau over tau, tau/2 and tau/4,
    cancelling the first- and second-order remainders; the result matches the
    assembled Gaussian generator when the screen satisfies its constraints.
    Returns (drift, diffusion) in the same convention as GaussianDynamics.
    """

    def one(tau_k):
        stepper = TrotterStepper(
            screen, tau_k, dims=dims, rho_f=rho_f,
            eta_convention=eta_convention, n_nodes=n_nodes,
        )
        A = _mean_step_matrix(stepper, dims)
        drift_T = (A - np.eye(4)) / tau_k
        rho_out, _ = stepper.apply(vacuum_state(dims).rho)
        gamma_out = covariance_of(FockState(rho_out, dims))
        gamma_in = covariance_of(vacuum_state(dims))
        evolved = A.T @ gamma_in @ A
        y_hat = (gamma_out - evolved) / tau_k
        return drift_T.T, y_hat

    x1, y1 = one(tau)
    x2, y2 = one(tau / 2)
    x4, y4 = one(tau / 4)
    # eliminate the O(tau) and O(tau^2) remainders
    x_hat = (x1 - 6.0 * x2 + 8.0 * x4) / 3.0
    y_hat = (y1 - 6.0 * y2 + 8.0 * y4) / 3.0
    return x_hat, y_hat


def fitted_coupling(
    screen=None,
    tau: float = 0.02,
    dims=(14, 14),
    eta_convention: str = DEFAULT_ETA_CONVENTION,
) -> float:
    """Effective x_a x_b coupling of the circuit's reduced dynamics.

    Reads eta off the extracted drift (drift^T = Delta_2 H, so the (p_a, x_b)
    entry is -H_13). For the identity screen this arbitrates the sign
    convention.
    """
    drift, _ = extract_generator(screen, tau=tau, dims=dims, eta_convention=eta_convention)
    return -float(drift.T[1, 2])


def sqrt_step_coefficient(
    screen,
    tau: float = 0.0025,
    dims=(14, 14),
    rho_f: np.ndarray = None,
    n_nodes: int = 21,
    eta_convention: str = DEFAULT_ETA_CONVENTION,
) -> float:
    """Magnitude of the sqrt(tau) term in the reduced step's mean response.

    Nonzero only when the screen fails quadrature-mean preservation, in which
    case the continuous-time limit does not exist. Extracted by Richardson
    combination of one-step mean displacements at tau and tau/4.
    """

    def mean_shift(tau_k):
        stepper = TrotterStepper(
            screen, tau_k, dims=dims, rho_f=rho_f,
            eta_convention=eta_convention, n_nodes=n_nodes,
        )
        state = _displaced_vacuum(0, 0.5, dims)
        rho_out, _ = stepper.apply(state.rho)
        return mean_quadratures(FockState(rho_out, dims)) - mean_quadratures(state)

    # eliminate the tau and tau^(3/2) terms of the expansion in sqrt(tau)
    coeff = (
        mean_shift(tau) / 3.0 - 4.0 * mean_shift(tau / 4) + (32.0 / 3.0) * mean_shift(tau / 16)
    ) / np.sqrt(tau)
    return float(np.max(np.abs(coeff)))


# --- literal three-mode reference (small dimensions only) ---


def reduced_step_dense(
    rho_ab: FockState,
    screen,
    tau: float,
    rho_f: np.ndarray = None,
    eta_convention: str = DEFAULT_ETA_CONVENTION,
    n_nodes: int = 21,
) -> FockState:
    """Direct product-space implementation of one circuit step.

    Builds the gates with expm on the full a x b x f space and traces the
    carrier; exponentially slower than reduced_step but shares no code path
    with it, so it validates the multiplier construction.
    """
    da, db = rho_ab.dims
    df = max(da, db)
    if rho_f is None:
        rho_f = np.zeros((df, df), dtype=complex)
        rho_f[0, 0] = 1.0
    root = np.sqrt(tau)
    Ia, Ib, If = np.eye(da), np.eye(db), np.eye(df)
    XA = np.kron(np.kron(position(da), Ib), position(df))
    PB = np.kron(np.kron(Ia, position(db)), momentum(df))
    UA = expm(-1j * root * XA)
    UB = expm(-1j * root * PB)
    n_a = np.kron(np.kron(number(da) + 0.5 * Ia, Ib), If)
    n_b = np.kron(np.kron(Ia, number(db) + 0.5 * Ib), If)
    U_loc = expm(-1j * tau * (n_a + n_b))

    rho = np.kron(rho_ab.rho, rho_f)
    rho = U_loc @ rho @ U_loc.conj().T
    if eta_convention == "positive":
        before, after = (UB, UA), (UB.conj().T, UA.conj().T)
    else:
        before, after = (UA, UB), (UA.conj().T, UB.conj().T)
    for U in before:
        rho = U @ rho @ U.conj().T
    kraus = carrier_kraus_ops(screen, df, n_nodes)
    rho = sum(
        np.kron(np.eye(da * db), K) @ rho @ np.kron(np.eye(da * db), K).conj().T for K in kraus
    )
    for U in after:
        rho = U @ rho @ U.conj().T
    rho = rho.reshape(da * db, df, da * db, df)
    reduced = np.einsum("afbf->ab", rho)
    return FockState(reduced, rho_ab.dims, rho_ab.notes)
