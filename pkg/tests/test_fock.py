import numpy as np
import pytest
from scipy.linalg import expm

from entnoise.dynamics import build_dynamics, propagate
from entnoise.fock import (
    amplitude_damping_kraus,
    coherent_vector,
    covariance_of,
    extract_generator,
    fitted_coupling,
    gate_identity_check,
    gauss_hermite_mixture,
    mean_quadratures,
    moments_numeric,
    momentum,
    position,
    product_state,
    reduced_step,
    reduced_step_dense,
    squeezed_vector,
    sqrt_step_coefficient,
    trotter_evolve,
    vacuum_state,
    _exchange_multiplier,
)
from entnoise.screens import DisplacementScreen, moments_from_displacement
from entnoise.states import vacuum_cov


def test_commutator_on_interior():
    d = 20
    comm = position(d) @ momentum(d) - momentum(d) @ position(d)
    defect = np.abs(comm[:-2, :-2] - 1j * np.eye(d)[:-2, :-2])
    assert np.max(defect) < 1e-12


def test_vacuum_covariance_is_identity():
    gamma = covariance_of(vacuum_state((12, 12)))
    np.testing.assert_allclose(gamma, np.eye(4), atol=1e-10)


def test_coherent_states_have_vacuum_covariance():
    st = product_state(coherent_vector(0.8, 25), coherent_vector(0.5j, 25))
    np.testing.assert_allclose(covariance_of(st), np.eye(4), atol=1e-10)
    means = mean_quadratures(st)
    assert means[0] == pytest.approx(0.8 * np.sqrt(2), abs=1e-10)
    assert means[3] == pytest.approx(0.5 * np.sqrt(2), abs=1e-10)


def test_squeezed_covariance():
    r = 0.2
    st = product_state(squeezed_vector(r, 30), coherent_vector(0, 30))
    target = np.diag([np.exp(-2 * r), np.exp(2 * r), 1.0, 1.0])
    gamma = covariance_of(st)
    flipped = np.diag([np.exp(2 * r), np.exp(-2 * r), 1.0, 1.0])
    # sign convention of the squeeze generator fixes which quadrature shrinks
    dev = min(np.max(np.abs(gamma - target)), np.max(np.abs(gamma - flipped)))
    assert dev < 1e-6


def test_gauss_hermite_mixture_moments():
    screen = DisplacementScreen(0.6, 0.2, 0.15)
    w, shifts = gauss_hermite_mixture(screen, 21)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    mean = w @ shifts
    np.testing.assert_allclose(mean, 0.0, atol=1e-12)
    second = (shifts * w[:, None]).T @ shifts
    np.testing.assert_allclose(second, screen.matrix, atol=1e-12)


def test_gate_identity_zero_time():
    assert gate_identity_check(0.0, 12) == pytest.approx(0.0, abs=1e-13)


def test_gate_identity_small_at_d25():
    assert gate_identity_check(0.1, 25) < 1e-8


def test_gate_identity_truncation_decays_with_d():
    # raw multiplier defect isolates truncation from state weighting
    def defect(d):
        a_vals, _ = np.linalg.eigh(position(d))
        circ = _exchange_multiplier(0.1, a_vals, a_vals, d, "positive")
        ph = np.exp(-1j * 0.1 * np.multiply.outer(a_vals, a_vals).ravel())
        return float(np.max(np.abs(circ - np.outer(ph, ph.conj()))))

    devs = [defect(d) for d in (16, 20, 25, 30)]
    assert all(a > b for a, b in zip(devs, devs[1:]))


def test_reduced_step_trace_preserving(rng):
    st = product_state(coherent_vector(0.4, 10), coherent_vector(-0.2j, 10))
    for screen in (None, DisplacementScreen(0.5, 0.3, 0.1)):
        out = reduced_step(st, screen, 0.17, n_nodes=11)
        assert out.trace() == pytest.approx(1.0, abs=1e-10)
        lam = np.linalg.eigvalsh(out.rho)
        assert lam.min() > -1e-8


def test_reduced_step_zero_time_is_identity():
    st = vacuum_state((8, 8))
    out = reduced_step(st, DisplacementScreen(0.4, 0.4), 0.0)
    np.testing.assert_array_equal(out.rho, st.rho)


def test_identity_screen_step_collapses_to_gates():
    # with no screen the step is the exchange gate composed with the local
    # rotation, which we can build directly; residual is pure truncation
    d, tau = 16, 0.23
    st = product_state(coherent_vector(0.5, d), coherent_vector(0.3j, d))
    out = reduced_step(st, None, tau)

    xx = np.kron(position(d), position(d))
    n_loc = np.kron(np.diag(np.arange(d) + 0.5), np.eye(d)) + np.kron(
        np.eye(d), np.diag(np.arange(d) + 0.5)
    )
    U = expm(-1j * tau * xx) @ expm(-1j * tau * n_loc)
    expected = U @ st.rho @ U.conj().T
    assert np.max(np.abs(out.rho - expected)) < 1e-10


def test_fast_step_matches_dense_reference():
    st = product_state(coherent_vector(0.4, 7), coherent_vector(-0.3, 7))
    screens = [
        None,
        DisplacementScreen(0.3, 0.5, 0.1),
        amplitude_damping_kraus(0.9, 7),
    ]
    for screen in screens:
        fast = reduced_step(st, screen, 0.2, n_nodes=9)
        dense = reduced_step_dense(st, screen, 0.2, n_nodes=9)
        assert np.max(np.abs(fast.rho - dense.rho)) < 1e-12


def test_fast_step_matches_dense_swapped_order():
    st = product_state(coherent_vector(0.3, 7), coherent_vector(0.5, 7))
    fast = reduced_step(st, DisplacementScreen(0.2, 0.4), 0.15, eta_convention="negative",
                        n_nodes=9)
    dense = reduced_step_dense(st, DisplacementScreen(0.2, 0.4), 0.15,
                               eta_convention="negative", n_nodes=9)
    assert np.max(np.abs(fast.rho - dense.rho)) < 1e-12


def test_trotter_first_order_convergence():
    screen = DisplacementScreen(0.3, 0.3)
    m = moments_from_displacement(screen)
    target = propagate(vacuum_cov(), build_dynamics(m), 1.0)
    devs = []
    for n in (8, 16, 32, 64):
        st = trotter_evolve(vacuum_state((14, 14)), screen, 1.0, n, n_nodes=13)
        devs.append(np.max(np.abs(covariance_of(st) - target)))
    assert all(a > b for a, b in zip(devs, devs[1:]))
    ratios = [a / b for a, b in zip(devs, devs[1:])]
    for ratio in ratios:
        assert 1.7 < ratio < 2.3  # O(1/n)
    # Richardson-extrapolating the 1/n error shows the limits agree
    extrapolated = 2 * devs[-1] - devs[-2]
    assert abs(extrapolated) < 2e-3


def test_trotter_rejects_bad_step_count():
    with pytest.raises(ValueError):
        trotter_evolve(vacuum_state((6, 6)), None, 1.0, 0)


def test_leakage_warning_attached():
    # a strong screen on a tiny carrier leaks population into the top levels
    st = vacuum_state((6, 6))
    out = reduced_step(st, DisplacementScreen(3.0, 3.0), 0.8, fc_dim=6, n_nodes=11)
    assert any("leakage" in note for note in out.notes)


def test_moments_numeric_identity_screen():
    m = moments_numeric(None, dim=20)
    assert m.eta == pytest.approx(1.0, abs=1e-10)
    assert m.xi == pytest.approx(0.0, abs=1e-10)
    np.testing.assert_allclose(m.Y, 0.0, atol=1e-10)
    assert m.nu_a == pytest.approx(0.0, abs=1e-10)


def test_moments_numeric_matches_closed_form():
    for screen in (
        DisplacementScreen(0.5, 0.5, 0.0),
        DisplacementScreen(0.8, 0.0, 0.0),
        DisplacementScreen(0.4, 0.9, -0.3),
    ):
        closed = moments_from_displacement(screen)
        numeric = moments_numeric(screen, dim=30, n_nodes=21)
        np.testing.assert_allclose(numeric.Y, closed.Y, atol=1e-6)
        assert numeric.eta == pytest.approx(closed.eta, abs=1e-6)
        assert abs(numeric.xi) < 1e-6
        assert abs(numeric.nu_a) < 1e-6 and abs(numeric.nu_b) < 1e-6
        assert numeric.mean_defect_x < 1e-9 and numeric.mean_defect_p < 1e-9


def test_moments_independent_of_reference_state():
    # displacement-screen moments do not depend on rho_f: vacuum vs thermal
    # (d large enough that thermal weight stays clear of the boundary rows)
    screen = DisplacementScreen(0.6, 0.3, 0.2)
    d = 60
    nbar = 2.0
    weights = (nbar / (1 + nbar)) ** np.arange(d)
    thermal = np.diag(weights / weights.sum()).astype(complex)
    m_vac = moments_numeric(screen, dim=d)
    m_th = moments_numeric(screen, rho_f=thermal, dim=d)
    np.testing.assert_allclose(m_th.Y, m_vac.Y, atol=1e-5)
    assert m_th.eta == pytest.approx(m_vac.eta, abs=1e-5)


def test_amplitude_damping_fails_convergence_on_displaced_state():
    from entnoise.screens import check_constraints

    d = 20
    screen = amplitude_damping_kraus(0.9, d)
    m_vac = moments_numeric(screen, dim=d)
    assert m_vac.mean_defect_x < 1e-12  # vacuum means are zero either way
    alpha = coherent_vector(1.0, d)
    displaced = np.outer(alpha, alpha.conj())
    m_disp = moments_numeric(screen, rho_f=displaced, dim=d)
    assert m_disp.mean_defect_x > 1e-2
    report = check_constraints(m_disp)
    assert not report.converges


def test_kraus_completeness_defect_is_flagged_not_fatal():
    # the truncated loss channel loses completeness only near the boundary
    screen = amplitude_damping_kraus(0.8, 10)
    defect = screen.completeness_defect()
    assert 0 < defect < 1.0
    # the step still runs; its trace defect on near-vacuum support stays tiny
    out = reduced_step(vacuum_state((6, 6)), screen, 0.1, fc_dim=10)
    assert out.trace() == pytest.approx(1.0, abs=1e-8)


def test_generator_extraction_matches_build_dynamics():
    screen = DisplacementScreen(0.4, 0.3, 0.1)
    dyn = build_dynamics(moments_from_displacement(screen))
    x_hat, y_hat = extract_generator(screen, n_nodes=15)
    assert np.max(np.abs(x_hat - dyn.drift)) < 1e-4
    assert np.max(np.abs(y_hat - dyn.diffusion)) < 1e-4


def test_fitted_coupling_sign_arbitration():
    assert fitted_coupling(None) == pytest.approx(1.0, abs=1e-4)
    assert fitted_coupling(None, eta_convention="negative") == pytest.approx(-1.0, abs=1e-4)


def test_sqrt_step_coefficient_vanishes_for_valid_screens():
    assert sqrt_step_coefficient(DisplacementScreen(0.4, 0.3, 0.1), n_nodes=15) < 1e-5
    assert sqrt_step_coefficient(None) < 1e-5


def test_sqrt_step_coefficient_detects_broken_screen():
    d = 14
    alpha = coherent_vector(0.8, d)
    displaced = np.outer(alpha, alpha.conj())
    coeff = sqrt_step_coefficient(amplitude_damping_kraus(0.9, d), rho_f=displaced)
    assert coeff > 1e-2


def test_thermal_carrier_reduced_step_trace_preserving():
    d = 10
    nbar = 0.5
    weights = (nbar / (1 + nbar)) ** np.arange(d)
    thermal = np.diag(weights / weights.sum()).astype(complex)
    st = vacuum_state((8, 8))
    out = reduced_step(st, DisplacementScreen(0.2, 0.2), 0.1, rho_f=thermal, fc_dim=d,
                       n_nodes=9)
    assert out.trace() == pytest.approx(1.0, abs=1e-10)
