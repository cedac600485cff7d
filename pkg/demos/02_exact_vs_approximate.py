"""How much does the first-order noise term matter?

The approximate master equation drops the first-order noise contribution.
For states without |11> weight nothing changes; with |11> weight the two
disagree during the transient and meet again in the steady state.
"""

# %%
import numpy as np

from nmqubits import SystemParams, evolve
from nmqubits.algebra import density_from_pure
from nmqubits.observables import trace_distances
from nmqubits.runner import resolve_state


def compare(p, state, t_final, n=401):
    t = np.linspace(0, t_final, n)
    rho0 = density_from_pure(resolve_state(state))
    exact = evolve(rho0, p, "exact", t_final, t).rho
    approx = evolve(rho0, p, "approx", t_final, t).rho
    return t, trace_distances(exact, approx)


# %% weak memory (gamma=1) vs long memory (gamma=0.1), kappa=1
for gamma in (0.1, 1.0):
    for omega in (0.5, 2.0):
        p = SystemParams.symmetric(gamma=gamma, omega=omega, kappa=1.0)
        t, d = compare(p, "plus_all", 100.0)
        print(f"gamma={gamma:<4} omega={omega:<4} max D={d.max():.4f} at t={t[d.argmax()]:.1f}")

# %% stronger coupling: big transient, small steady-state gap
p = SystemParams.symmetric(gamma=0.1, omega=0.5, kappa=2.0)
t, d = compare(p, "plus_all", 200.0)
for tk in (5, 10, 20, 50, 100, 200):
    print(f"t={tk:>5}  D={d[np.searchsorted(t, tk)]:.4f}")

# %% no |11> component: the two equations coincide
t, d = compare(p, "no11", 200.0)
print(f"\nno |11> weight: max D = {d.max():.1e}")

# the approximation can even leave the set of states (negative eigenvalue)
rho = evolve(density_from_pure(resolve_state("plus_all")), p, "approx", 10.0).rho
print("smallest eigenvalue under the approximation:", np.linalg.eigvalsh(rho).min().round(4))
