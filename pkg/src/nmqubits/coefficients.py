"""Auxiliary bath functions driving the master equation.

The master equation needs ten complex functions of time: the memory
integrals fbar1..fbar4 of the zeroth-order O-operator, ftilde5 of the
first-order part, and the double integrals F1..F5. For the
Ornstein-Uhlenbeck kernel they obey a closed system of ODEs, implemented
here. All components vanish at t = 0.

State vectors are complex arrays of length 10 ordered as
``[fbar1, fbar2, fbar3, fbar4, ftilde5, F1, F2, F3, F4, F5]``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, astuple
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .algebra import SystemParams

N_COEFFS = 10
COEFF_NAMES = ("fbar1", "fbar2", "fbar3", "fbar4", "ftilde5",
               "big_f1", "big_f2", "big_f3", "big_f4", "big_f5")
FBAR = slice(0, 4)
FTILDE5 = 4
BIG_F = slice(5, 10)


@dataclass(frozen=True)
class CoefficientState:
    fbar1: complex = 0j
    fbar2: complex = 0j
    fbar3: complex = 0j
    fbar4: complex = 0j
    ftilde5: complex = 0j
    big_f1: complex = 0j
    big_f2: complex = 0j
    big_f3: complex = 0j
    big_f4: complex = 0j
    big_f5: complex = 0j

    def to_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=complex)

    @classmethod
    def from_array(cls, y) -> "CoefficientState":
        y = np.asarray(y, dtype=complex)
        if y.shape != (N_COEFFS,):
            raise ValueError(f"expected shape ({N_COEFFS},), got {y.shape}")
        return cls(*(complex(v) for v in y))


def correlation_alpha(t, s, gamma: float):
    """Ornstein-Uhlenbeck bath correlation ``(gamma/2) exp(-gamma |t - s|)``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return 0.5 * gamma * np.exp(-gamma * np.abs(np.asarray(t) - np.asarray(s)))


def fbar5_diagonal(fbar3, fbar4, p: SystemParams):
    """Two-time fbar5(t, t) = -i (kappa_a fbar3 + kappa_b fbar4)."""
    return -1j * (p.kappa_a * fbar3 + p.kappa_b * fbar4)


def fbar5_rate(fbar1, fbar2, p: SystemParams):
    """Growth rate of the two-time fbar5(t, s1) in t; independent of s1."""
    return (-p.gamma + 2j * (p.omega_a + p.omega_b)
            + 2 * p.kappa_a * fbar1 + 2 * p.kappa_b * fbar2)


def _fbar_rhs(fb, ft5, p: SystemParams):
    f1, f2, f3, f4 = fb
    ka, kb, g = p.kappa_a, p.kappa_b, p.gamma
    shared = 2j * p.j_z + ka * f4 + kb * f3
    d1 = (0.5 * g * ka + (-g + 2j * p.omega_a + ka * f1) * f1
          + (-1j * p.j_xy + kb * f4) * f3 + shared * f4 - 1j * kb * ft5)
    d2 = (0.5 * g * kb + (-g + 2j * p.omega_b + kb * f2) * f2
          + (-1j * p.j_xy + ka * f3) * f4 + shared * f3 - 1j * ka * ft5)
    d3 = ((-g + 2j * p.omega_b + ka * f4 + kb * f2) * f3
          + (-1j * p.j_xy - ka * f2 + ka * f3) * f1 + shared * f2 - 1j * ka * ft5)
    d4 = ((-g + 2j * p.omega_a + ka * f1 + kb * f3) * f4
          + (-1j * p.j_xy - kb * f1 + kb * f4) * f2 + shared * f1 - 1j * kb * ft5)
    return d1, d2, d3, d4


def coefficient_rhs_exact(y: np.ndarray, p: SystemParams) -> np.ndarray:
    """Time derivative of the full ten-component coefficient state."""
    # python complex scalars: several times faster than numpy scalars here
    f1, f2, f3, f4, ft5, F1, F2, F3, F4, F5 = (complex(v) for v in y)
    ka, kb, g = p.kappa_a, p.kappa_b, p.gamma
    out = np.empty(N_COEFFS, dtype=complex)

    out[0:4] = _fbar_rhs((f1, f2, f3, f4), ft5, p)
    out[4] = (-0.5j * g * (ka * f3 + kb * f4)
              + (fbar5_rate(f1, f2, p) - g) * ft5)

    # fbar_j * conj(fbar5(t, t)) = i fbar_j * src
    src = ka * f3.conjugate() + kb * f4.conjugate()
    shared = 2j * p.j_z + ka * f4 + kb * f3
    damp = -g + 2 * ka * f1.conjugate() + 2 * kb * f2.conjugate()
    out[5] = (1j * f1 * src + ka * ft5.conjugate()
              + (ka * f1 + kb * f3 - 2j * p.omega_b + damp) * F1
              + (-1j * p.j_xy - kb * f1 + kb * f4) * F3
              + shared * F4 - 1j * kb * F5)
    out[6] = (1j * f2 * src + kb * ft5.conjugate()
              + (ka * f4 + kb * f2 - 2j * p.omega_a + damp) * F2
              + (-1j * p.j_xy - ka * f2 + ka * f3) * F4
              + shared * F3 - 1j * ka * F5)
    out[7] = (1j * f3 * src
              + (ka * f4 + kb * f2 - 2j * p.omega_a + damp) * F3
              + (-1j * p.j_xy - ka * f2 + ka * f3) * F1
              + shared * F2 - 1j * ka * F5)
    out[8] = (1j * f4 * src
              + (ka * f1 + kb * f3 - 2j * p.omega_b + damp) * F4
              + (-1j * p.j_xy - kb * f1 + kb * f4) * F2
              + shared * F1 - 1j * kb * F5)
    out[9] = (2 * (1j * ft5 * src).real
              + (-2 * g + 4 * ka * f1.real + 4 * kb * f2.real) * F5)
    return out


def coefficient_rhs_approx(y: np.ndarray, p: SystemParams) -> np.ndarray:
    """Coefficient derivative with the first-order noise term dropped.

    Only fbar1..fbar4 evolve; ftilde5 and F1..F5 are held at zero.
    """
    out = np.zeros(N_COEFFS, dtype=complex)
    out[0:4] = _fbar_rhs([complex(v) for v in y[0:4]], 0.0, p)
    return out


def markov_asymptote(p: SystemParams) -> CoefficientState:
    """Large-gamma fixed point: fbar1 = kappa_a/2, fbar2 = kappa_b/2, rest 0."""
    return CoefficientState(fbar1=0.5 * p.kappa_a, fbar2=0.5 * p.kappa_b)


@dataclass
class CoefficientSolution:
    t: np.ndarray
    y: np.ndarray          # shape (len(t), 10)
    log_g: np.ndarray      # integral of fbar5_rate from 0 to t

    def state(self, i: int) -> CoefficientState:
        return CoefficientState.from_array(self.y[i])


def integrate_coefficients(p: SystemParams, t_eval, exact: bool = True,
                           rtol: float = 1e-10, atol: float = 1e-12,
                           max_step: float | None = None) -> CoefficientSolution:
    """Integrate the coefficient system from the zero state at t = 0.

    Also accumulates ``log_g(t)``, the integral of the two-time fbar5 growth
    rate, which the trajectory code uses to propagate its first-order noise
    accumulator.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    rhs = coefficient_rhs_exact if exact else coefficient_rhs_approx

    def fun(t, z):
        dz = np.empty_like(z)
        dz[:N_COEFFS] = rhs(z[:N_COEFFS], p)
        dz[N_COEFFS] = fbar5_rate(z[0], z[1], p)
        return dz

    if max_step is None:
        max_step = 0.1 / p.gamma
    t_end = float(t_eval[-1]) if t_eval.size else 0.0
    z0 = np.zeros(N_COEFFS + 1, dtype=complex)
    if t_end == 0.0:
        n = t_eval.size
        return CoefficientSolution(t_eval, np.zeros((n, N_COEFFS), complex),
                                   np.zeros(n, complex))
    sol = solve_ivp(fun, (0.0, t_end), z0, method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=atol, max_step=max_step)
    if not sol.success:
        raise RuntimeError(f"coefficient integration failed: {sol.message}")
    return CoefficientSolution(sol.t, sol.y[:N_COEFFS].T.copy(), sol.y[N_COEFFS].copy())


def write_coefficient_csv(path, t, y) -> None:
    """Diagnostic dump: t followed by re/im of every component."""
    header = ["t"]
    for name in COEFF_NAMES:
        header += [f"re_{name}", f"im_{name}"]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for ti, yi in zip(t, y):
            row = [f"{ti:.17g}"]
            for v in yi:
                row += [f"{v.real:.17g}", f"{v.imag:.17g}"]
            w.writerow(row)
