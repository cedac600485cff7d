"""Short bath memory: approach to the Lindblad equation.

The distance to the memoryless reference comes almost entirely from the
first ~1/gamma of the evolution, while the coefficients switch on.
"""

import numpy as np

from nmqubits import SystemParams, pseudomode_reference
from nmqubits.algebra import density_from_pure
from nmqubits.master import evolve
from nmqubits.observables import trace_distances

rho0 = density_from_pure(np.array([0, 1, 0, 0], dtype=complex))
t = np.linspace(0, 5, 2001)

for gamma in (5.0, 25.0, 50.0, 200.0):
    p = SystemParams.symmetric(gamma=gamma, omega=0.5, kappa=1.0)
    exact = pseudomode_reference(p, rho0, t)   # fast and exact at any gamma
    markov = evolve(rho0, p, "lindblad", t[-1], t).rho
    d = trace_distances(exact, markov)
    print(f"gamma={gamma:6.1f}  max D={d.max():.4f} at t={t[d.argmax()]:.3f}"
          f"  gamma*maxD={gamma * d.max():.2f}")
