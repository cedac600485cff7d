"""Purity and entanglement of two coupled qubits in a memory bath.

Four initial states, one parameter set (gamma=1, omega=0.5, kappa=1,
J_xy=0.7, J_z=0.3). Three of them lose purity and come back to a pure
state; |10> ends up mixed and entangled.
"""

# %%
import numpy as np

from nmqubits import SystemParams, concurrence, evolve, purity
from nmqubits.algebra import density_from_pure
from nmqubits.runner import resolve_state

p = SystemParams.symmetric(gamma=1.0, omega=0.5, kappa=1.0, j_xy=0.7, j_z=0.3)
t = np.linspace(0, 40, 401)

# %% purity along each run
runs = {}
for name in ("state10", "bell_phi", "bell_psi", "state11"):
    rho0 = density_from_pure(resolve_state(name))
    runs[name] = evolve(rho0, p, "exact", t[-1], t)

print(f"{'t':>6}" + "".join(f"{n:>10}" for n in runs))
for k in range(0, t.size, 25):
    print(f"{t[k]:6.1f}" + "".join(f"{purity(r.rho[k]):10.4f}" for r in runs.values()))

# %% the |10> run settles into the single-excitation sector
rho = runs["state10"].rho[-1]
np.set_printoptions(precision=4, suppress=True)
print("\nsteady state from |10>:")
print(rho.real)
print("rho_23 =", np.round(rho[1, 2], 5))
print("concurrence =", round(concurrence(rho), 4))   # ~0.5: mixed *and* entangled

# %% entanglement is generated on the way, not only at the end
c = np.array([concurrence(r) for r in runs["state10"].rho])
print(f"\nconcurrence from |10>: max {c.max():.3f} at t={t[c.argmax()]:.1f}, "
      f"final {c[-1]:.3f}")
