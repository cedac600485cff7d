"""Reduced density-matrix dynamics: exact, first-order-noise-free, and Lindblad.

The density matrix and the ten bath coefficients are co-integrated as a
single 26-component complex vector ``[vec(rho) (16), coeffs (10)]``.
The coefficients never depend on rho.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45, solve_ivp

from .algebra import (LOWERING_OPS, RAISE_BOTH, SystemParams, adjoint,
                      build_hamiltonian, build_lowering, commutator, hermitize)
from .coefficients import (N_COEFFS, coefficient_rhs_approx,
                           coefficient_rhs_exact, markov_asymptote)

log = logging.getLogger(__name__)

HERMITICITY_STEP_LIMIT = 1e-12
MIN_EIG_LIMIT = -1e-6


_LOWERING_STACK = np.array(LOWERING_OPS)
_RAISING_STACK = adjoint(_LOWERING_STACK)


class MasterEquationMethod(enum.Enum):
    EXACT = "exact"
    APPROX = "approx"
    LINDBLAD = "lindblad"


class IntegrationError(RuntimeError):
    pass


class StepFailure(IntegrationError):
    """The adaptive controller could not find an acceptable step."""


class NanDetected(IntegrationError):
    """A state component became non-finite."""


class PositivityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    max_step: float = np.inf
    method: str = "rk45"  # "rk45" (adaptive Dormand-Prince) or "rk4" (fixed step)

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"unknown integrator method {self.method!r}")


def m_pt_obar_dag(rho: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Ensemble average of P_t Obar^dagger in closed form.

    ``rho (sum_j conj(fbar_j) S_j^dag) - 2i (sum_j F_j S_j) rho |11><00|``
    where S_j runs over sigma_-^A, sigma_-^B, sigma_z^A sigma_-^B and
    sigma_-^A sigma_z^B.
    """
    c = np.asarray(coeffs)
    out = rho @ np.tensordot(c[:4].conj(), _RAISING_STACK, axes=1)
    if np.any(c[5:9]):
        big_f = np.tensordot(c[5:9], _LOWERING_STACK, axes=1)
        out = out - 2j * (big_f @ rho @ RAISE_BOTH)
    return out


@dataclass
class MasterEquation:
    """Right-hand side of the augmented (rho, coefficients) system."""

    params: SystemParams
    method: MasterEquationMethod = MasterEquationMethod.EXACT
    hamiltonian: np.ndarray = field(init=False)
    lowering: np.ndarray = field(init=False)

    def __post_init__(self):
        self.method = MasterEquationMethod(self.method)
        self.hamiltonian = build_hamiltonian(self.params)
        self.lowering = build_lowering(self.params)
        self._frozen = markov_asymptote(self.params).to_array()

    def rho_rhs(self, rho: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        if self.method is MasterEquationMethod.LINDBLAD:
            coeffs = self._frozen
        m = m_pt_obar_dag(rho, coeffs)
        # [M^dag, L^dag] is the adjoint of [L, M]
        x = commutator(self.lowering, m)
        return -1j * commutator(self.hamiltonian, rho) + x + adjoint(x)

    def coeff_rhs(self, coeffs: np.ndarray) -> np.ndarray:
        if self.method is MasterEquationMethod.EXACT:
            return coefficient_rhs_exact(coeffs, self.params)
        if self.method is MasterEquationMethod.APPROX:
            return coefficient_rhs_approx(coeffs, self.params)
        return np.zeros(N_COEFFS, dtype=complex)

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        rho = y[:16].reshape(4, 4)
        out = np.empty_like(y)
        out[:16] = self.rho_rhs(rho, y[16:]).ravel()
        out[16:] = self.coeff_rhs(y[16:])
        return out

    def initial_coefficients(self) -> np.ndarray:
        if self.method is MasterEquationMethod.LINDBLAD:
            return self._frozen.copy()
        return np.zeros(N_COEFFS, dtype=complex)


def master_rhs(rho: np.ndarray, coeffs: np.ndarray, p: SystemParams,
               method=MasterEquationMethod.EXACT) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(drho/dt, dcoeffs/dt)`` for one augmented state."""
    eq = MasterEquation(p, method)
    return eq.rho_rhs(np.asarray(rho, dtype=complex), coeffs), eq.coeff_rhs(coeffs)


@dataclass
class EvolutionResult:
    t: np.ndarray
    rho: np.ndarray      # (n, 4, 4)
    coeffs: np.ndarray   # (n, 10)
    method: MasterEquationMethod
    n_steps: int = 0
    n_rhs: int = 0
    max_herm_drift: float = 0.0


def _check_finite(y, t):
    if not np.all(np.isfinite(y)):
        raise NanDetected(f"non-finite state component at t={t:.6g}")


def _symmetrize_inplace(y: np.ndarray) -> float:
    rho = y[:16].reshape(4, 4)
    drift = float(np.max(np.abs(rho - adjoint(rho))))
    y[:16] = hermitize(rho).ravel()
    return drift


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve(rho0, p: SystemParams, method=MasterEquationMethod.EXACT,
           t_final: float = 15.0, out_grid=None,
           cfg: IntegratorConfig | None = None) -> EvolutionResult:
    """Integrate the master equation from ``rho0`` and sample on ``out_grid``.

    The step size is capped at ``min(cfg.max_step, 0.1/gamma)``. After each
    accepted step rho is re-symmetrized; the per-step Hermiticity drift
    before re-symmetrization is recorded in ``max_herm_drift``.

    Raises
    ------
    StepFailure
        If the adaptive step size underflows.
    NanDetected
        If any component becomes non-finite.
    """
    cfg = cfg or IntegratorConfig()
    method = MasterEquationMethod(method)
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (4, 4):
        raise ValueError("rho0 must be 4x4")
    if out_grid is None:
        out_grid = np.linspace(0.0, t_final, 401)
    out_grid = np.asarray(out_grid, dtype=float)
    if out_grid.size and (out_grid[0] < 0 or out_grid[-1] > t_final + 1e-12
                          or np.any(np.diff(out_grid) < 0)):
        raise ValueError("out_grid must be sorted and lie within [0, t_final]")

    eq = MasterEquation(p, method)
    y0 = np.concatenate([hermitize(rho0).ravel(), eq.initial_coefficients()])
    _check_finite(y0, 0.0)
    max_step = min(cfg.max_step, 0.1 / p.gamma)
    samples = np.empty((out_grid.size, y0.size), dtype=complex)
    n_rhs = 0

    def f(t, y):
        nonlocal n_rhs
        n_rhs += 1
        return eq(t, y)

    res = EvolutionResult(out_grid, None, None, method)
    k = 0
    while k < out_grid.size and out_grid[k] <= 0.0:
        samples[k] = y0
        k += 1

    if cfg.method == "rk4":
        t, y = 0.0, y0.copy()
        while k < out_grid.size:
            target = out_grid[k]
            n_sub = max(1, int(np.ceil((target - t) / max_step - 1e-9)))
            h = (target - t) / n_sub
            for _ in range(n_sub):
                y = _rk4_step(f, t, y, h)
                t += h
                res.n_steps += 1
                _check_finite(y, t)
                res.max_herm_drift = max(res.max_herm_drift, _symmetrize_inplace(y))
            t = target
            samples[k] = y
            k += 1
    elif k < out_grid.size and t_final > 0:
        solver = RK45(f, 0.0, y0, t_final, max_step=max_step,
                      rtol=cfg.rel_tol, atol=cfg.abs_tol)
        while k < out_grid.size:
            msg = solver.step()
            if solver.status == "failed":
                raise StepFailure(f"step failed at t={solver.t:.6g}: {msg}")
            res.n_steps += 1
            _check_finite(solver.y, solver.t)
            interp = solver.dense_output()
            while k < out_grid.size and out_grid[k] <= solver.t:
                samples[k] = interp(out_grid[k])
                k += 1
            res.max_herm_drift = max(res.max_herm_drift, _symmetrize_inplace(solver.y))
            if solver.status == "finished" and k < out_grid.size:
                samples[k:] = solver.y
                k = out_grid.size

    rho = hermitize(samples[:, :16].reshape(-1, 4, 4))
    res.rho = rho
    res.coeffs = samples[:, 16:].copy()
    res.n_rhs = n_rhs
    if res.max_herm_drift > HERMITICITY_STEP_LIMIT:
        log.warning("Hermiticity drift %.3g per step exceeds %.1g",
                    res.max_herm_drift, HERMITICITY_STEP_LIMIT)
    if rho.size:
        min_eig = float(np.min(np.linalg.eigvalsh(rho)))
        if min_eig < MIN_EIG_LIMIT:
            warnings.warn(f"density matrix eigenvalue {min_eig:.3g} below "
                          f"{MIN_EIG_LIMIT}", PositivityWarning, stacklevel=2)
    return res


def rho11_closed_form_check(run: EvolutionResult, p: SystemParams,
                            rtol: float = 1e-11, atol: float = 1e-13) -> float:
    """Max deviation of rho_11(t) from its noise-free closed form.

    For identical qubits the |11> amplitude evolves deterministically, so
    ``rho_11(t) = rho_11(0) exp(-4 kappa int_0^t Re(fbar1 + fbar3))``. The
    integral is computed by an independent tight-tolerance integration of
    the coefficient system.
    """
    if not p.is_symmetric:
        raise ValueError("closed form for rho_11 requires omega_a == omega_b "
                         "and kappa_a == kappa_b")
    method = run.method
    if method is MasterEquationMethod.LINDBLAD:
        rate = np.full(run.t.shape, 0.5 * p.kappa_a)
        integral = rate * run.t
    else:
        rhs = (coefficient_rhs_exact if method is MasterEquationMethod.EXACT
               else coefficient_rhs_approx)

        def fun(t, z):
            out = np.zeros_like(z)
            out[:N_COEFFS] = rhs(z[:N_COEFFS], p)
            out[N_COEFFS] = (z[0] + z[2]).real
            return out

        t_end = float(run.t[-1])
        if t_end == 0:
            integral = np.zeros_like(run.t)
        else:
            sol = solve_ivp(fun, (0.0, t_end), np.zeros(N_COEFFS + 1, complex),
                            method="DOP853", t_eval=run.t, rtol=rtol, atol=atol,
                            max_step=0.1 / p.gamma)
            integral = sol.y[N_COEFFS].real
    predicted = run.rho[0, 0, 0].real * np.exp(-4 * p.kappa_a * integral)
    return float(np.max(np.abs(run.rho[:, 0, 0].real - predicted)))
