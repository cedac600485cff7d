import numpy as np
import pytest

from nmqubits import master
from nmqubits.algebra import (RAISE_BOTH, SM_A, SystemParams, adjoint, build_hamiltonian,
                              build_lowering, commutator, density_from_pure)
from nmqubits.coefficients import N_COEFFS, markov_asymptote
from nmqubits.master import (IntegratorConfig, MasterEquationMethod, NanDetected,
                             PositivityWarning, StepFailure, evolve,
                             m_pt_obar_dag, master_rhs, rho11_closed_form_check)
from nmqubits.observables import purity, trace_distances
from nmqubits.runner import resolve_state

from conftest import random_density

METHODS = list(MasterEquationMethod)


def rho_of(name):
    return density_from_pure(resolve_state(name))


def random_coeffs(rng):
    c = rng.normal(size=N_COEFFS) + 1j * rng.normal(size=N_COEFFS)
    c[9] = c[9].real
    return c


def test_m_pt_obar_dag_examples(rng):
    rho = random_density(rng)
    assert not m_pt_obar_dag(rho, np.zeros(N_COEFFS)).any()

    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1
    coeffs = np.zeros(N_COEFFS, dtype=complex)
    coeffs[5] = 1
    expected = np.zeros((4, 4), dtype=complex)
    expected[2, 3] = -2j  # -2i |01><00|
    np.testing.assert_allclose(m_pt_obar_dag(rho, coeffs), expected)
    np.testing.assert_allclose(expected, -2j * SM_A @ rho @ RAISE_BOTH)


def test_big_f_term_needs_weight_on_11(rng):
    psi = np.array([0, 0.6, 0.48, 0.64], dtype=complex)
    rho = density_from_pure(psi)
    coeffs = random_coeffs(rng)
    first_only = coeffs.copy()
    first_only[4:] = 0
    np.testing.assert_allclose(m_pt_obar_dag(rho, coeffs), m_pt_obar_dag(rho, first_only))


@pytest.mark.parametrize("method", METHODS)
def test_rhs_trace_free_and_hermitian(method, rng):
    p = SystemParams(0.3, 0.9, 0.5, -0.2, 1.4, 0.7, 0.8)
    for _ in range(20):
        drho, _ = master_rhs(random_density(rng), random_coeffs(rng), p, method)
        assert abs(np.trace(drho)) <= 1e-12
        assert np.max(np.abs(drho - adjoint(drho))) <= 1e-12


@pytest.mark.parametrize("method", METHODS)
def test_ground_state_is_stationary(method, rng, fig1_params):
    drho, _ = master_rhs(rho_of("state10") * 0 + np.diag([0, 0, 0, 1]),
                         random_coeffs(rng), fig1_params, method)
    assert np.max(np.abs(drho)) < 1e-14


def test_closed_system_limit(rng):
    p = SystemParams.symmetric(gamma=1.0, omega=0.5, kappa=0.0)
    rho = random_density(rng)
    drho, _ = master_rhs(rho, np.zeros(N_COEFFS), p)
    np.testing.assert_allclose(drho, -1j * commutator(build_hamiltonian(p), rho), atol=1e-15)
    run = evolve(rho_of("plus_all"), p, "exact", 5.0)
    # conserved up to the integrator's relative tolerance (1e-7)
    assert np.max(np.abs([purity(r) - 1 for r in run.rho])) < 1e-6


def test_lindblad_form(rng, fig1_params):
    rho = random_density(rng)
    L = build_lowering(fig1_params)
    drho, dc = master_rhs(rho, random_coeffs(rng), fig1_params, "lindblad")
    expected = (-1j * commutator(build_hamiltonian(fig1_params), rho)
                + 0.5 * (commutator(L, rho @ adjoint(L)) + commutator(L @ rho, adjoint(L))))
    np.testing.assert_allclose(drho, expected, atol=1e-14)
    assert not dc.any()


def test_lindblad_run_keeps_frozen_coefficients(fig1_params):
    run = evolve(rho_of("state10"), fig1_params, "lindblad", 1.0)
    np.testing.assert_array_equal(run.coeffs[-1], markov_asymptote(fig1_params).to_array())


def test_zero_window(fig1_params):
    rho0 = rho_of("bell_phi")
    run = evolve(rho0, fig1_params, "exact", 0.0, [0.0])
    assert run.rho.shape == (1, 4, 4)
    np.testing.assert_allclose(run.rho[0], rho0)


@pytest.mark.parametrize("name", ["plus_all", "bell_psi", "state11"])
def test_emitted_states_valid(name, fig1_params):
    run = evolve(rho_of(name), fig1_params, "exact", 10.0)
    tr = np.trace(run.rho, axis1=1, axis2=2)
    assert np.max(np.abs(tr - 1)) <= 1e-8
    assert np.max(np.abs(run.rho - adjoint(run.rho))) <= 1e-10
    assert np.linalg.eigvalsh(run.rho).min() >= -1e-6
    assert run.max_herm_drift <= 1e-12
    # identical qubits and an exchange-symmetric start keep rho_j2 = rho_j3
    np.testing.assert_allclose(run.rho[:, :, 1], run.rho[:, :, 2], atol=1e-9)
    np.testing.assert_allclose(run.coeffs[:, 0], run.coeffs[:, 1], atol=1e-8)


def test_rho11_closed_form(fig1_params):
    run = evolve(rho_of("state11"), fig1_params, "exact", 15.0)
    assert rho11_closed_form_check(run, fig1_params) <= 1e-6
    approx = evolve(rho_of("state11"), fig1_params, "approx", 15.0)
    assert rho11_closed_form_check(approx, fig1_params) <= 1e-6


def test_rho11_trivial_cases(fig1_params):
    run = evolve(rho_of("state10"), fig1_params, "exact", 5.0)
    assert rho11_closed_form_check(run, fig1_params) == 0.0
    p = SystemParams.symmetric(gamma=1.0, omega=0.5, kappa=0.0)
    run = evolve(rho_of("state11"), p, "exact", 5.0)
    assert rho11_closed_form_check(run, p) < 1e-12


def test_rho11_rejects_asymmetric():
    p = SystemParams(0.5, 0.6, 0.7, 0.3, 1, 1, 1)
    run = evolve(rho_of("state11"), p, "exact", 1.0)
    with pytest.raises(ValueError):
        rho11_closed_form_check(run, p)


def test_no_11_weight_collapses_approximation():
    p = SystemParams.symmetric(gamma=0.1, omega=0.5, kappa=2.0)
    grid = np.linspace(0, 50, 201)
    exact = evolve(rho_of("no11"), p, "exact", 50.0, grid)
    approx = evolve(rho_of("no11"), p, "approx", 50.0, grid)
    assert trace_distances(exact.rho, approx.rho).max() <= 5e-7


def test_rk4_agrees_with_adaptive(fig1_params):
    grid = np.linspace(0, 5, 51)
    a = evolve(rho_of("plus_all"), fig1_params, "exact", 5.0, grid)
    b = evolve(rho_of("plus_all"), fig1_params, "exact", 5.0, grid,
               IntegratorConfig(method="rk4", max_step=0.01))
    assert trace_distances(a.rho, b.rho).max() < 1e-6


def test_deterministic(fig1_params):
    a = evolve(rho_of("bell_phi"), fig1_params, "exact", 3.0)
    b = evolve(rho_of("bell_phi"), fig1_params, "exact", 3.0)
    np.testing.assert_array_equal(a.rho, b.rho)


def test_positivity_monitor_warns_for_approximation():
    p = SystemParams.symmetric(gamma=0.1, omega=0.5, kappa=2.0)
    with pytest.warns(PositivityWarning):
        evolve(rho_of("plus_all"), p, "approx", 6.0)


def test_nan_detected(fig1_params):
    rho0 = rho_of("state10")
    rho0[1, 1] = np.nan
    with pytest.raises(NanDetected):
        evolve(rho0, fig1_params, "exact", 1.0)


def test_step_failure(monkeypatch, fig1_params):
    class Failing(master.RK45):
        def step(self):
            self.status = "failed"
            return "required step size is less than spacing between numbers"

    monkeypatch.setattr(master, "RK45", Failing)
    with pytest.raises(StepFailure):
        evolve(rho_of("state10"), fig1_params, "exact", 1.0)


def test_bad_inputs(fig1_params):
    with pytest.raises(ValueError):
        evolve(np.eye(3), fig1_params)
    with pytest.raises(ValueError):
        evolve(rho_of("state10"), fig1_params, "exact", 1.0, [0.0, 2.0])
    with pytest.raises(ValueError):
        IntegratorConfig(abs_tol=0)
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")
