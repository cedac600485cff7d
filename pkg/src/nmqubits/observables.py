"""Scalar diagnostics of two-qubit density matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import adjoint

# sigma_y (x) sigma_y in the {|11>, |10>, |01>, |00>} basis
SIGMA_YY = np.array([[0, 0, 0, -1],
                     [0, 0, 1, 0],
                     [0, 1, 0, 0],
                     [-1, 0, 0, 0]], dtype=complex)


@dataclass(frozen=True)
class SanityReport:
    trace: float
    min_eig: float
    herm_defect: float


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    purity: float
    concurrence: float
    trace: float
    min_eig: float
    herm_defect: float


def purity(rho: np.ndarray) -> float:
    """``tr(rho^2)``; for a Hermitian rho this is the squared Frobenius norm."""
    rho = np.asarray(rho)
    return float(np.real(np.einsum("ij,ji->", rho, rho)))


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The spin flip uses complex conjugation in the fixed computational basis.
    """
    rho = np.asarray(rho, dtype=complex)
    flipped = SIGMA_YY @ rho.conj() @ SIGMA_YY
    ev = np.linalg.eigvals(rho @ flipped)
    lam = np.sort(np.sqrt(np.abs(ev.real)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of ``a - b``."""
    d = np.asarray(a) - np.asarray(b)
    d = 0.5 * (d + adjoint(d))
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(d))))


def trace_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Trace distance along two stacks of density matrices."""
    d = np.asarray(a) - np.asarray(b)
    d = 0.5 * (d + adjoint(d))
    return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(d)), axis=-1)


def sanity_monitor(rho: np.ndarray) -> SanityReport:
    rho = np.asarray(rho, dtype=complex)
    herm = 0.5 * (rho + adjoint(rho))
    return SanityReport(
        trace=float(np.trace(rho).real),
        min_eig=float(np.linalg.eigvalsh(herm)[0]),
        herm_defect=float(np.max(np.abs(rho - adjoint(rho)))),
    )


def observe(t: float, rho: np.ndarray) -> ObservableRecord:
    s = sanity_monitor(rho)
    return ObservableRecord(t=float(t), purity=purity(rho),
                            concurrence=concurrence(rho), trace=s.trace,
                            min_eig=s.min_eig, herm_defect=s.herm_defect)
