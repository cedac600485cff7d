"""Pseudomode reference solver for the Ornstein-Uhlenbeck bath.

A single damped bosonic mode with coupling ``g`` and decay rate ``Gamma``
reproduces the bath correlation ``g^2 exp(-(Gamma/2)|tau|)``. With
``g^2 = gamma/2`` and ``Gamma = 2 gamma`` this is exactly the OU kernel, so
the Markovian Lindblad equation of system (x) mode gives the exact reduced
dynamics. At most two excitations exist in the system, so a Fock cutoff of
two is exact.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .algebra import SystemParams, adjoint, build_hamiltonian, build_lowering


def _liouvillian(h: np.ndarray, jumps) -> np.ndarray:
    """Superoperator acting on row-major vec(rho)."""
    n = h.shape[0]
    eye = np.eye(n)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in jumps:
        cdc = adjoint(c) @ c
        lv += (np.kron(c, c.conj())
               - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T))
    return lv


def pseudomode_reference(p: SystemParams, rho0, t_grid, n_max: int = 2,
                         coupling: float | None = None,
                         mode_decay: float | None = None) -> np.ndarray:
    """Reduced system states on ``t_grid`` from the pseudomode embedding.

    ``coupling`` and ``mode_decay`` override ``sqrt(gamma/2)`` and
    ``2 gamma``. Propagation uses the matrix exponential of the
    Liouvillian between consecutive grid points.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    t_grid = np.asarray(t_grid, dtype=float)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    # highest excitation number present in rho0: 2 for any |11> weight
    pops = np.abs(np.diag(rho0))
    excitations = 2 if pops[0] > 0 else (1 if np.any(pops[1:3] > 0) else 0)
    if excitations > n_max:
        raise ValueError(f"initial state carries {excitations} excitations; "
                         f"mode cutoff n_max={n_max} would truncate them")
    g = np.sqrt(0.5 * p.gamma) if coupling is None else coupling
    decay = 2.0 * p.gamma if mode_decay is None else mode_decay

    nm = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, nm)), k=1).astype(complex)
    eye_s, eye_m = np.eye(4), np.eye(nm)
    L = build_lowering(p)
    h = (np.kron(build_hamiltonian(p), eye_m)
         + g * (np.kron(L, adjoint(a)) + np.kron(adjoint(L), a)))
    lv = _liouvillian(h, [np.sqrt(decay) * np.kron(eye_s, a)])

    vac = np.zeros((nm, nm), dtype=complex)
    vac[0, 0] = 1.0
    vec = np.kron(rho0, vac).ravel()
    out = np.empty((t_grid.size, 4, 4), dtype=complex)
    t_prev = 0.0
    cache: dict[float, np.ndarray] = {}
    for i, t in enumerate(t_grid):
        dt = t - t_prev
        if dt < 0:
            raise ValueError("t_grid must be non-decreasing and start at >= 0")
        if dt > 0:
            key = round(dt, 12)
            if key not in cache:
                cache[key] = expm(lv * dt)
            vec = cache[key] @ vec
        full = vec.reshape(4 * nm, 4 * nm)
        out[i] = np.einsum("imjm->ij", full.reshape(4, nm, 4, nm))
        t_prev = t
    return out
