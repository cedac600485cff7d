"""Cross-checking the master equation three independent ways.

1. average of linear quantum-state-diffusion trajectories driven by
   sampled Ornstein-Uhlenbeck noise
2. brute-force two-time quadrature of the coefficient functions
3. a single damped bosonic mode that reproduces the bath correlation
"""

# %%
import time

import numpy as np

from nmqubits import (EnsembleConfig, SystemParams, ensemble_average, evolve,
                      pseudomode_reference, two_time_oracle)
from nmqubits.algebra import density_from_pure
from nmqubits.observables import trace_distances

p = SystemParams.symmetric(gamma=1.0, omega=0.5, kappa=1.0)
psi0 = np.array([0, 1, 0, 0], dtype=complex)
t = np.linspace(0, 15, 151)
exact = evolve(density_from_pure(psi0), p, "exact", 15.0, t).rho

# %% trajectories: error should fall like 1/sqrt(N)
for n in (250, 1000, 4000):
    tic = time.perf_counter()
    ens = ensemble_average(p, psi0, EnsembleConfig(n_traj=n, seed=7), t)
    d = trace_distances(ens.rho, exact)
    print(f"N={n:5d}  max D={d.max():.4f}  rms D={np.sqrt(np.mean(d**2)):.4f}  "
          f"trace drift={ens.trace_drift.max():.3f}  ({time.perf_counter() - tic:.1f} s)")

# %% two-time quadrature: second-order convergence in the grid
for n_s in (100, 200, 400, 800):
    rep = two_time_oracle(p, 2.0, n_s)
    print(f"n_s={n_s:4d}  fbar {rep.fbar_deviation:.2e}  ftilde5 {rep.ftilde5_deviation:.2e}"
          f"  F {rep.big_f_deviation:.2e}")

# %% pseudomode
ref = pseudomode_reference(p, density_from_pure(psi0), t)
print("pseudomode vs master equation:", trace_distances(ref, exact).max())
