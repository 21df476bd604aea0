"""Dense diagonalization of sector Hamiltonians, used as the non-perturbative oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import Sector, wigner_d
from .model import MAX_SECTOR, ModelParams, derive, sector_hamiltonian

__all__ = ["AmbiguousLabel", "EigenSystem", "diagonalize", "exact_dressed_labels"]


class AmbiguousLabel(RuntimeError):
    """An exact eigenvector has no dominant zeroth-order dressed component."""


@dataclass(frozen=True)
class EigenSystem:
    sector: Sector
    params: ModelParams
    energies: np.ndarray
    vectors: np.ndarray

    def residual(self) -> float:
        h = sector_hamiltonian(self.sector, self.params)
        return float(np.abs(h @ self.vectors - self.vectors * self.energies).max())


def diagonalize(s: Sector, params: ModelParams) -> EigenSystem:
    """Full eigensystem of the sector Hamiltonian, energies ascending.

    Each eigenvector's sign is fixed so that its largest-magnitude entry is
    positive.
    """
    if s.n_total > MAX_SECTOR:
        raise ValueError(f"sector N={s.n_total} exceeds cap {MAX_SECTOR}")
    w, v = np.linalg.eigh(sector_hamiltonian(s, params))
    pivot = np.abs(v).argmax(axis=0)
    signs = np.sign(v[pivot, np.arange(s.dim)])
    signs[signs == 0] = 1.0
    return EigenSystem(s, params, w, v * signs)


def exact_dressed_labels(es: EigenSystem, min_overlap2: float = 0.5) -> list[float]:
    """Label each exact eigenvector by its closest zeroth-order dressed state.

    Returns the m label for each eigenvector in energy order. Raises
    ``AmbiguousLabel`` if a maximal squared overlap falls below
    ``min_overlap2`` or the labels do not form a permutation.
    """
    d = wigner_d(es.sector, derive(es.params).theta)
    ov2 = (d.T @ es.vectors) ** 2
    best = ov2.argmax(axis=0)
    for col, row in enumerate(best):
        if ov2[row, col] < min_overlap2:
            raise AmbiguousLabel(
                f"eigenvector {col} of sector N={es.sector.n_total} has max overlap^2 "
                f"{ov2[row, col]:.3g} < {min_overlap2}")
    if len(set(best.tolist())) != es.sector.dim:
        raise AmbiguousLabel(f"labels in sector N={es.sector.n_total} are not a permutation")
    return [float(es.sector.m_values[r]) for r in best]
