"""Operator algebra for two qubits in the basis {|11>, |10>, |01>, |00>}.

Qubit A is the left tensor factor. ``sigma_z|1> = |1>`` and
``sigma_z|0> = -|0>``, so index 0 is the doubly excited state and index 3
the ground state.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Literal

import numpy as np

Qubit = Literal["A", "B"]
Kind = Literal["plus", "minus", "z"]

DIM = 4

# basis index -> (excitation of A, excitation of B)
BASIS_BITS = ((1, 1), (1, 0), (0, 1), (0, 0))
BASIS_LABELS = ("11", "10", "01", "00")


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the two-qubit model (hbar = 1).

    All quantities share the same inverse-time unit. ``gamma`` is the
    inverse memory time of the Ornstein-Uhlenbeck bath.
    """

    omega_a: float
    omega_b: float
    j_xy: float
    j_z: float
    kappa_a: float
    kappa_b: float
    gamma: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.kappa_a < 0 or self.kappa_b < 0:
            raise ValueError("kappa_a and kappa_b must be non-negative")

    @classmethod
    def symmetric(cls, gamma: float, omega: float, kappa: float,
                  j_xy: float = 0.7, j_z: float = 0.3) -> "SystemParams":
        """Parameters with identical qubits (omega_a = omega_b, kappa_a = kappa_b)."""
        return cls(omega_a=omega, omega_b=omega, j_xy=j_xy, j_z=j_z,
                   kappa_a=kappa, kappa_b=kappa, gamma=gamma)

    @property
    def is_symmetric(self) -> bool:
        return self.omega_a == self.omega_b and self.kappa_a == self.kappa_b


def _single_qubit(kind: Kind) -> np.ndarray:
    # 2x2 in the ordering (|1>, |0>)
    if kind == "plus":
        return np.array([[0, 1], [0, 0]], dtype=complex)
    if kind == "minus":
        return np.array([[0, 0], [1, 0]], dtype=complex)
    if kind == "z":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    raise ValueError(f"unknown operator kind {kind!r}")


def kron_embedded(qubit: Qubit, kind: Kind) -> np.ndarray:
    """Embed a single-qubit operator with a Kronecker product."""
    op = _single_qubit(kind)
    eye = np.eye(2, dtype=complex)
    if qubit == "A":
        return np.kron(op, eye)
    if qubit == "B":
        return np.kron(eye, op)
    raise ValueError(f"unknown qubit {qubit!r}")


def pauli_embedded(qubit: Qubit, kind: Kind) -> np.ndarray:
    """Return sigma_kind on ``qubit`` and identity on the other qubit.

    Built from the action on each basis state rather than from a Kronecker
    product; :func:`kron_embedded` provides the second construction path.
    """
    if qubit not in ("A", "B"):
        raise ValueError(f"unknown qubit {qubit!r}")
    pos = 0 if qubit == "A" else 1
    out = np.zeros((DIM, DIM), dtype=complex)
    for col, bits in enumerate(BASIS_BITS):
        b = bits[pos]
        if kind == "z":
            out[col, col] = 1.0 if b else -1.0
            continue
        if kind == "plus" and b == 0:
            new = list(bits)
            new[pos] = 1
        elif kind == "minus" and b == 1:
            new = list(bits)
            new[pos] = 0
        elif kind in ("plus", "minus"):
            continue
        else:
            raise ValueError(f"unknown operator kind {kind!r}")
        out[BASIS_BITS.index(tuple(new)), col] = 1.0
    return out


SM_A = pauli_embedded("A", "minus")
SM_B = pauli_embedded("B", "minus")
SP_A = pauli_embedded("A", "plus")
SP_B = pauli_embedded("B", "plus")
SZ_A = pauli_embedded("A", "z")
SZ_B = pauli_embedded("B", "z")
for _m in (SM_A, SM_B, SP_A, SP_B, SZ_A, SZ_B):
    _m.setflags(write=False)

# operator basis of the zeroth-order O-operator: sigma_-^A, sigma_-^B,
# sigma_z^A sigma_-^B, sigma_-^A sigma_z^B
LOWERING_OPS = (SM_A, SM_B, SZ_A @ SM_B, SM_A @ SZ_B)
# |11><00|
RAISE_BOTH = SP_A @ SP_B


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def build_hamiltonian(p: SystemParams) -> np.ndarray:
    """System Hamiltonian with XXZ qubit-qubit coupling."""
    return (p.omega_a * SZ_A + p.omega_b * SZ_B
            + p.j_xy * (SP_A @ SM_B + SM_A @ SP_B)
            + p.j_z * SZ_A @ SZ_B)


def build_lowering(p: SystemParams) -> np.ndarray:
    """Bath coupling operator ``L = kappa_a sigma_-^A + kappa_b sigma_-^B``."""
    return p.kappa_a * SM_A + p.kappa_b * SM_B


def pure_state(c1: complex, c2: complex, c3: complex, c4: complex) -> np.ndarray:
    """Amplitudes on |11>, |10>, |01>, |00>; not normalized."""
    return np.array([c1, c2, c3, c4], dtype=complex)


def density_from_pure(psi: np.ndarray) -> np.ndarray:
    """Outer product ``|psi><psi|``. Works on stacks of states."""
    psi = np.asarray(psi, dtype=complex)
    return psi[..., :, None] * np.conj(psi[..., None, :])


def hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + adjoint(rho))
