"""Two-mode (photon, exciton) number sectors in the Schwinger angular-momentum picture.

A sector with total excitation number ``n_total`` is a spin ``j = n_total / 2``
multiplet. Basis vectors are ordered by ascending photon number, so index ``i``
holds ``i`` photons and ``n_total - i`` excitons, and ``m = i - j``. Every
module in the package relies on this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

__all__ = [
    "Sector",
    "sector",
    "angular_momentum_matrices",
    "wigner_d",
    "wigner_small_d",
    "dipole_raising",
]


@dataclass(frozen=True)
class Sector:
    """Eigenspace of the total number operator.

    Attributes
    ----------
    n_total : int
        Photons plus excitons.
    """

    n_total: int

    def __post_init__(self):
        if isinstance(self.n_total, bool) or int(self.n_total) != self.n_total:
            raise TypeError(f"n_total must be an integer, got {self.n_total!r}")
        if self.n_total < 0:
            raise ValueError(f"n_total must be >= 0, got {self.n_total}")
        object.__setattr__(self, "n_total", int(self.n_total))

    @property
    def j(self) -> float:
        return self.n_total / 2

    @property
    def dim(self) -> int:
        return self.n_total + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.j

    @property
    def photons(self) -> np.ndarray:
        return np.arange(self.dim)

    @property
    def excitons(self) -> np.ndarray:
        return self.n_total - np.arange(self.dim)

    def basis(self) -> list[tuple[int, int]]:
        """(photons, excitons) for each basis index."""
        return [(i, self.n_total - i) for i in range(self.dim)]

    def index(self, m: float) -> int:
        i = m + self.j
        if abs(i - round(i)) > 1e-9 or not 0 <= round(i) < self.dim:
            raise ValueError(f"m={m} is not a valid label for j={self.j}")
        return int(round(i))


def sector(n_total: int) -> Sector:
    return Sector(n_total)


def _raising(s: Sector) -> np.ndarray:
    # J+ = a^dag b: moves one exciton into the cavity, index i -> i + 1
    j = s.j
    m = s.m_values[:-1]
    jp = np.zeros((s.dim, s.dim))
    idx = np.arange(s.dim - 1)
    jp[idx + 1, idx] = np.sqrt(j * (j + 1) - m * (m + 1))
    return jp


def angular_momentum_matrices(s: Sector) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-j matrices (Jx, Jy, Jz) in the ascending-m basis.

    Jx and Jz are real; Jy is purely imaginary and returned as complex.
    """
    jp = _raising(s)
    jm = jp.T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(s.m_values.astype(float))
    return jx, jy, jz


def wigner_d(s: Sector, theta: float) -> np.ndarray:
    """Rotation matrix ``D[m', m] = <j m'| exp(-i theta Jy) |j m>``.

    Computed from the eigendecomposition of Jy. The result is real
    orthogonal; column ``k`` is the zeroth-order dressed state with label
    ``m = k - j`` expanded in the bare basis.
    """
    if not np.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta}")
    _, jy, _ = angular_momentum_matrices(s)
    w, u = np.linalg.eigh(jy)
    d = (u * np.exp(-1j * theta * w)) @ u.conj().T
    return np.ascontiguousarray(d.real)


def wigner_small_d(j: float, m_row: float, m_col: float, theta: float) -> float:
    """Factorial (Wigner) formula for a single small-d element.

    Loses precision for large j; meant for j up to about 5.
    """
    jm_, jpm, jmr, jpr = (int(round(v)) for v in (j - m_col, j + m_col, j - m_row, j + m_row))
    diff = int(round(m_row - m_col))
    pref = np.sqrt(float(factorial(jpm) * factorial(jm_) * factorial(jpr) * factorial(jmr)))
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    total = 0.0
    for k in range(max(0, -diff), min(jpm, jmr) + 1):
        den = factorial(jpm - k) * factorial(k) * factorial(jmr - k) * factorial(k + diff)
        total += (-1) ** (k + diff) * c ** (jpm + jmr - 2 * k) * s ** (2 * k + diff) / den
    return float(pref * total)


def dipole_raising(s_low: Sector, nu: float = 0.0) -> np.ndarray:
    """Matrix of ``B^dag = b^dag - nu b^dag b^dag b`` from sector N to N + 1.

    Shape ``(N + 2, N + 1)``. Photon number is unchanged, so basis index
    ``i`` maps to index ``i`` of the upper sector, i.e. ``m -> m - 1/2``.
    """
    nb = s_low.excitons.astype(float)
    out = np.zeros((s_low.dim + 1, s_low.dim))
    idx = np.arange(s_low.dim)
    out[idx, idx] = np.sqrt(nb + 1) * (1 - nu * nb)
    return out
