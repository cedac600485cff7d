import numpy as np
import pytest

from nmqubits.algebra import (LOWERING_OPS, SM_A, SM_B, SystemParams, adjoint,
                              build_hamiltonian, build_lowering)
from nmqubits.coefficients import fbar5_diagonal
from nmqubits.two_time import _pde_rhs, oracle_convergence, two_time_oracle

ASYM = SystemParams(omega_a=0.4, omega_b=0.9, j_xy=0.7, j_z=0.3,
                    kappa_a=1.2, kappa_b=0.6, gamma=1.3)


@pytest.fixture(scope="module")
def fig1_oracles(fig1_params):
    return {n: two_time_oracle(fig1_params, 2.0, n) for n in (200, 400, 800)}


@pytest.mark.parametrize("seed", range(5))
def test_characteristic_equations_follow_from_consistency_condition(seed):
    """d O0/dt = [-iH - L^dag Obar0, O0] - 2i fbar5 L^dag s-A s-B.

    O0 = sum_j f_j S_j and Obar0 = sum_j fbar_j S_j over the four lowering
    operators; the last term is the zeroth-order functional derivative of
    Obar. Evaluated on random coefficients and asymmetric parameters.
    """
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(1, 4)) + 1j * rng.normal(size=(1, 4))
    fbar = rng.normal(size=4) + 1j * rng.normal(size=4)
    f5 = complex(rng.normal(), rng.normal())
    ops = np.array(LOWERING_OPS)
    h, L = build_hamiltonian(ASYM), build_lowering(ASYM)
    o0 = np.tensordot(f[0], ops, axes=1)
    a = -1j * h - adjoint(L) @ np.tensordot(fbar, ops, axes=1)
    expected = a @ o0 - o0 @ a - 2j * f5 * adjoint(L) @ SM_A @ SM_B
    got = np.tensordot(_pde_rhs(f, np.array([f5]), fbar, ASYM)[0], ops, axes=1)
    assert np.max(np.abs(got - expected)) < 1e-13


def test_fbar1_at_unit_time(fig1_params):
    rep = two_time_oracle(fig1_params, 1.0, 400)
    assert abs(rep.fbar_quad[-1, 0] - rep.fbar_ode[-1, 0]) < 1e-4


def test_empty_interval(fig1_params):
    rep = two_time_oracle(fig1_params, 0.0, 100)
    assert not rep.fbar_quad.any()
    assert rep.fbar_deviation == 0 and rep.ftilde5_deviation == 0
    assert rep.big_f_deviation == 0


def test_uncoupled_case_is_exact():
    p = SystemParams.symmetric(gamma=1.0, omega=0.5, kappa=0.0)
    rep = two_time_oracle(p, 2.0, 100)
    assert rep.fbar_deviation == 0.0
    assert rep.big_f_deviation == 0.0


def test_second_order_convergence(fig1_oracles):
    devs = [fig1_oracles[n].fbar_deviation for n in (200, 400, 800)]
    assert devs[1] < 1e-3
    assert devs[0] / devs[1] > 3 and devs[1] / devs[2] > 3
    for attr in ("ftilde5_deviation", "big_f_deviation"):
        d = [getattr(fig1_oracles[n], attr) for n in (200, 400, 800)]
        assert d[1] < 1e-3 and d[1] / d[2] > 3


def test_factorization_of_two_time_fbar5(fig1_oracles):
    assert fig1_oracles[400].factorization_error < 1e-6
    assert fig1_oracles[800].factorization_error < fig1_oracles[400].factorization_error


def test_diagonal_invariants(fig1_oracles):
    rep = fig1_oracles[400]
    grid = rep.final_grid
    np.testing.assert_array_equal(grid.f[-1], [1.0, 1.0, 0.0, 0.0])
    fb = rep.fbar_quad[-1]
    assert grid.fbar5_two_time[-1] == pytest.approx(
        fbar5_diagonal(fb[2], fb[3], SystemParams.symmetric(1.0, 0.5, 1.0)))


def test_printed_big_f_system_is_consistent_for_distinct_qubits():
    # the kappa ftilde5* drives appear only in dF1 and dF2; the quadrature
    # reconstruction agrees with them for unequal qubits too
    reps = [two_time_oracle(ASYM, 2.0, n, n_check=4) for n in (200, 400)]
    assert reps[1].big_f_deviation < 1e-4
    assert reps[0].big_f_deviation / reps[1].big_f_deviation > 3
    assert reps[1].fbar_deviation < 1e-4


def test_convergence_study_flags(fig1_params):
    study = oracle_convergence(fig1_params, 1.0, [100, 200])
    assert not study.diverging
    assert study.ratios[0] > 3


def test_rejects_empty_grid(fig1_params):
    with pytest.raises(ValueError):
        two_time_oracle(fig1_params, 1.0, 0)
