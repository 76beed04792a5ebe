"""Exact time evolution from a one-time eigendecomposition of H.

H is fixed for a whole run, so ``exp(-iHt)`` is ``V exp(-i lambda t) V^dagger``
for any ``t``. Diagonal generators only rotate phases. A fixed-step RK4
integrator is kept as an independent check on the exact propagator.
"""

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.linalg

from app.errors import DimensionMismatchError, SimulationError

logger = logging.getLogger(__name__)

RECONSTRUCTION_TOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def propagator(self, t: float) -> np.ndarray:
        """Dense unitary ``exp(-iHt)``."""
        V = self.eigenvectors
        return (V * np.exp(-1j * self.eigenvalues * t)) @ V.conj().T


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    time: float = 0.0

    @property
    def dimension(self) -> int:
        return len(self.amplitudes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap_error(self, other: "StateVector") -> float:
        """``1 - |<self|other>|``; zero for identical normalized states."""
        return float(1.0 - abs(np.vdot(self.amplitudes, other.amplitudes)))


def _check_dimension(expected: int, actual: int, what: str) -> None:
    if expected != actual:
        raise DimensionMismatchError(f"{what}: operator dimension {expected}, state dimension {actual}")


def decompose(H: np.ndarray) -> SpectralDecomposition:
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise SimulationError(f"eigensolver failed on a {H.shape[0]}x{H.shape[0]} Hamiltonian: {exc}") from exc

    spec = SpectralDecomposition(eigenvalues, eigenvectors)
    error = np.max(np.abs(spec.reconstruct() - H)) if H.size else 0.0
    if error > RECONSTRUCTION_TOL:
        raise SimulationError(f"eigendecomposition reconstruction error {error:.2e}")
    logger.debug("decomposed H of dimension %d, reconstruction error %.1e", H.shape[0], error)
    return spec


def decompose_blocks(blocks: Sequence[np.ndarray]) -> SpectralDecomposition:
    """Decomposition of a block-diagonal H given as its blocks.

    Eigenvectors stay block-supported, so evolution never mixes blocks.
    """
    parts = [decompose(H) for H in blocks]
    eigenvalues = np.concatenate([p.eigenvalues for p in parts])
    eigenvectors = scipy.linalg.block_diag(*[p.eigenvectors for p in parts])
    order = np.argsort(eigenvalues, kind="stable")
    return SpectralDecomposition(eigenvalues[order], eigenvectors[:, order])


def evolve(spec: SpectralDecomposition, psi: StateVector, t: float) -> StateVector:
    _check_dimension(spec.dimension, psi.dimension, "evolve")
    V = spec.eigenvectors
    coefficients = V.conj().T @ psi.amplitudes
    amplitudes = V @ (np.exp(-1j * spec.eigenvalues * t) * coefficients)
    return StateVector(amplitudes, psi.time + t)


def apply_propagator(U: np.ndarray, psi: StateVector, t: float) -> StateVector:
    """Apply a precomputed ``U = exp(-iHt)``; ``t`` only advances the clock."""
    _check_dimension(U.shape[0], psi.dimension, "apply_propagator")
    return StateVector(U @ psi.amplitudes, psi.time + t)


def apply_diagonal_phase(D: np.ndarray, psi: StateVector, t: float, advance_time: bool = True) -> StateVector:
    """Multiply amplitude ``k`` by ``exp(-i D_k t)``."""
    _check_dimension(len(D), psi.dimension, "apply_diagonal_phase")
    amplitudes = psi.amplitudes * np.exp(-1j * D * t)
    return StateVector(amplitudes, psi.time + t if advance_time else psi.time)


def integrate_reference(H: np.ndarray, psi: StateVector, t: float, dt: float) -> StateVector:
    """Fixed-step RK4 for ``i dpsi/dt = H psi``.

    Keep ``||H|| * dt <= 0.05``. The result is not renormalized, so norm
    drift stays visible.
    """
    _check_dimension(H.shape[0], psi.dimension, "integrate_reference")
    if t == 0:
        return replace(psi)

    n_steps = max(1, int(np.ceil(abs(t) / dt - 1e-9)))
    h = t / n_steps
    y = np.array(psi.amplitudes, dtype=complex)

    def rhs(v):
        return -1j * (H @ v)

    for _ in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return StateVector(y, psi.time + t)


def eigenstate_overlaps(spec: SpectralDecomposition, psi: StateVector) -> np.ndarray:
    """Weights ``|<E_n|psi>|^2`` in the order of ``spec.eigenvalues``."""
    _check_dimension(spec.dimension, psi.dimension, "eigenstate_overlaps")
    return np.abs(spec.eigenvectors.conj().T @ psi.amplitudes) ** 2


def participation_ratio(weights: np.ndarray) -> float:
    """Effective number of eigenstates; 1 for an eigenstate."""
    return float(np.sum(weights) ** 2 / np.sum(weights**2))
