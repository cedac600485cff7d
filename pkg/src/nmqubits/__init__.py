"""Non-Markovian dynamics of two interacting qubits in an Ornstein-Uhlenbeck bath."""

__version__ = "0.1.0"

from .algebra import SystemParams, build_hamiltonian, build_lowering, pauli_embedded
from .coefficients import CoefficientState, integrate_coefficients
from .master import (IntegrationError, IntegratorConfig, MasterEquationMethod,
                     evolve, master_rhs)
from .observables import concurrence, purity, sanity_monitor, trace_distance
from .pseudomode import pseudomode_reference
from .stochastic import EnsembleConfig, ensemble_average, sample_ou_path
from .two_time import two_time_oracle

__all__ = [
    "CoefficientState", "EnsembleConfig", "IntegrationError", "IntegratorConfig",
    "MasterEquationMethod", "SystemParams", "build_hamiltonian", "build_lowering",
    "concurrence", "ensemble_average", "evolve", "integrate_coefficients",
    "master_rhs", "pauli_embedded", "pseudomode_reference", "purity",
    "sample_ou_path", "sanity_monitor", "trace_distance", "two_time_oracle",
]
