"""Linear quantum-state-diffusion trajectories with Ornstein-Uhlenbeck noise.

Independent check of the master equation: unnormalized pure states are
driven by sampled colored noise and averaged, ``rho_t = M[|psi_t><psi_t|]``.
The amplitude equations hold only for identical qubits
(omega_a = omega_b, kappa_a = kappa_b); other parameters are rejected.

Random numbers come from one generator per trajectory keyed by
``(seed, trajectory index)``, so results do not depend on batching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .algebra import SystemParams, density_from_pure
from .coefficients import fbar5_diagonal, integrate_coefficients


@dataclass(frozen=True)
class EnsembleConfig:
    n_traj: int = 2000
    seed: int = 12345
    dt: float = 0.01

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be at least 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")


@dataclass
class NoisePath:
    """Samples of ``z*_t`` on ``t = k dt``; a leading axis may index paths."""

    dt: float
    z_star: np.ndarray


@dataclass
class TrajectoryState:
    c: np.ndarray        # (..., 4) amplitudes on |11>, |10>, |01>, |00>
    fhat5: np.ndarray    # (...,) running first-order noise integral

    @classmethod
    def start(cls, psi0, batch: int | None = None) -> "TrajectoryState":
        psi0 = np.asarray(psi0, dtype=complex)
        if batch is None:
            return cls(psi0.copy(), np.zeros((), dtype=complex))
        return cls(np.tile(psi0, (batch, 1)), np.zeros(batch, dtype=complex))


def _generator(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def _circular_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    # unit mean-square: real and imaginary parts each have variance 1/2
    x = rng.standard_normal(2 * n)
    return (x[:n] + 1j * x[n:]) * np.sqrt(0.5)


def sample_ou_paths(gamma: float, dt: float, n_steps: int, seed: int,
                    indices) -> NoisePath:
    """Stationary complex OU paths for the trajectory ``indices``.

    Exact discretization ``z_{k+1} = z_k e^{-gamma dt} + xi sqrt(gamma/2 (1 - e^{-2 gamma dt}))``
    with ``z_0`` of mean-square gamma/2. Returns ``n_steps + 1`` samples per path.
    """
    if not (gamma > 0 and dt > 0):
        raise ValueError("gamma and dt must be positive")
    decay = np.exp(-gamma * dt)
    kick = np.sqrt(0.5 * gamma * (1.0 - decay ** 2))
    indices = np.atleast_1d(indices)
    xi = np.empty((indices.size, n_steps + 1), dtype=complex)
    for row, idx in enumerate(indices):
        xi[row] = _circular_normal(_generator(seed, int(idx)), n_steps + 1)
    drive = xi * kick
    drive[:, 0] = xi[:, 0] * np.sqrt(0.5 * gamma)
    # AR(1) recursion z_k = decay z_{k-1} + drive_k along time
    z = lfilter([1.0], [1.0, -decay], drive, axis=1)
    return NoisePath(dt=dt, z_star=np.conj(z))


def sample_ou_path(gamma: float, dt: float, t_final: float, seed: int,
                   index: int = 0) -> NoisePath:
    n_steps = int(round(t_final / dt))
    path = sample_ou_paths(gamma, dt, n_steps, seed, [index])
    return NoisePath(dt=dt, z_star=path.z_star[0])


@dataclass
class CoefficientTable:
    """Noise-independent coefficients on the half-step grid ``t = j dt/2``."""

    dt: float
    fbar: np.ndarray       # (2n+1, 4)
    fbar5_diag: np.ndarray  # (2n+1,)
    log_g: np.ndarray      # (2n+1,)

    @classmethod
    def build(cls, p: SystemParams, dt: float, n_steps: int) -> "CoefficientTable":
        t_half = np.arange(2 * n_steps + 1) * (0.5 * dt)
        sol = integrate_coefficients(p, t_half, exact=True, rtol=1e-11, atol=1e-13)
        fbar = sol.y[:, :4]
        return cls(dt, fbar, fbar5_diagonal(fbar[:, 2], fbar[:, 3], p), sol.log_g)


def _check_symmetric(p: SystemParams):
    if not p.is_symmetric:
        raise ValueError("trajectory equations require omega_a == omega_b "
                         "and kappa_a == kappa_b")


def qsd_derivative(c: np.ndarray, z_star, fbar1, fbar3, fhat5,
                   p: SystemParams) -> np.ndarray:
    """Amplitude derivatives of the linear QSD equation for identical qubits."""
    w, k, jz, jxy = p.omega_a, p.kappa_a, p.j_z, p.j_xy
    c1, c2, c3, c4 = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    diff = k * (fbar1 - fbar3)
    drive = k * z_star * c1 - 2 * k * fhat5 * c1
    out = np.empty_like(c)
    out[..., 0] = -1j * (2 * w + jz) * c1 - 2 * k * (fbar1 + fbar3) * c1
    out[..., 1] = drive + 1j * jz * c2 - diff * c2 - 1j * jxy * c3 - diff * c3
    out[..., 2] = drive + 1j * jz * c3 - diff * c2 - 1j * jxy * c2 - diff * c3
    out[..., 3] = k * z_star * (c2 + c3) - 1j * (jz - 2 * w) * c4
    return out


def _advance_fhat5(fhat5, table: CoefficientTable, j: int, z_a, z_b):
    """Propagate the first-order noise integral over one half step.

    Uses the factorized two-time fbar5: over [t_j, t_{j+1}] the existing
    integral is multiplied by g(t_{j+1})/g(t_j) and the new sliver is added
    by the trapezoid rule.
    """
    h = 0.5 * table.dt
    growth = np.exp(table.log_g[j + 1] - table.log_g[j])
    new = 0.5 * h * (growth * table.fbar5_diag[j] * z_a + table.fbar5_diag[j + 1] * z_b)
    return growth * fhat5 + 1j * new


def trajectory_step(state: TrajectoryState, noise: NoisePath,
                    table: CoefficientTable, p: SystemParams,
                    n: int) -> TrajectoryState:
    """One RK4 step from ``t = n dt`` to ``(n+1) dt``.

    ``z*`` at the midpoint is the average of the two neighbouring samples.
    """
    _check_symmetric(p)
    dt = noise.dt
    z0 = noise.z_star[..., n]
    z2 = noise.z_star[..., n + 1]
    z1 = 0.5 * (z0 + z2)
    j = 2 * n
    fh0 = state.fhat5
    fh1 = _advance_fhat5(fh0, table, j, z0, z1)
    fh2 = _advance_fhat5(fh1, table, j + 1, z1, z2)
    fb = table.fbar

    def rhs(c, i, z, fh):
        return qsd_derivative(c, z, fb[i, 0], fb[i, 2], fh, p)

    c = state.c
    k1 = rhs(c, j, z0, fh0)
    k2 = rhs(c + 0.5 * dt * k1, j + 1, z1, fh1)
    k3 = rhs(c + 0.5 * dt * k2, j + 1, z1, fh1)
    k4 = rhs(c + dt * k3, j + 2, z2, fh2)
    return TrajectoryState(c + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4), fh2)


@dataclass
class EnsembleResult:
    t: np.ndarray
    rho: np.ndarray          # (n_t, 4, 4)
    trace_drift: np.ndarray  # |tr(rho) - 1| per output time
    n_traj: int


def _grid_indices(t_grid, dt):
    idx = np.rint(np.asarray(t_grid, dtype=float) / dt).astype(int)
    if np.any(np.abs(idx * dt - np.asarray(t_grid)) > 1e-9 * max(1.0, dt)):
        raise ValueError("output times must be multiples of the trajectory dt")
    if np.any(np.diff(idx) < 0) or (idx.size and idx[0] < 0):
        raise ValueError("output times must be sorted and non-negative")
    return idx


def ensemble_average(p: SystemParams, psi0, cfg: EnsembleConfig, t_grid,
                     batch_size: int = 1000) -> EnsembleResult:
    """Average ``|psi_t><psi_t|`` over ``cfg.n_traj`` linear QSD trajectories.

    Trajectories run in fixed-size batches; per-batch sums are added in
    batch order, so the result is bit-stable for a given seed and n_traj.
    """
    _check_symmetric(p)
    psi0 = np.asarray(psi0, dtype=complex)
    t_grid = np.asarray(t_grid, dtype=float)
    out_idx = _grid_indices(t_grid, cfg.dt)
    n_steps = int(out_idx[-1]) if out_idx.size else 0
    table = CoefficientTable.build(p, cfg.dt, max(n_steps, 1))

    total = np.zeros((t_grid.size, 4, 4), dtype=complex)
    for start in range(0, cfg.n_traj, batch_size):
        ids = np.arange(start, min(start + batch_size, cfg.n_traj))
        noise = sample_ou_paths(p.gamma, cfg.dt, n_steps, cfg.seed, ids)
        state = TrajectoryState.start(psi0, ids.size)
        acc = np.zeros_like(total)
        k = 0
        for n in range(n_steps + 1):
            while k < out_idx.size and out_idx[k] == n:
                acc[k] = density_from_pure(state.c).sum(axis=0)
                k += 1
            if n < n_steps:
                state = trajectory_step(state, noise, table, p, n)
        total += acc
    rho = total / cfg.n_traj
    drift = np.abs(np.trace(rho, axis1=1, axis2=2).real - 1.0)
    return EnsembleResult(t_grid, rho, drift, cfg.n_traj)
