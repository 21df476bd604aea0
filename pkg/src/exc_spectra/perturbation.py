"""First-order perturbation theory around the rotated (polariton) basis.

The unperturbed levels of a sector are ``N*Omega + m*G`` with eigenvectors
given by the Wigner rotation of the bare Fock states. The exciton-exciton
interaction and phase-space-filling terms are treated to first order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .hilbert import Sector, wigner_d
from .model import DegenerateRotationError, ModelParams, derive

__all__ = [
    "PerturbationValidityWarning",
    "DressedState",
    "hprime_element",
    "hprime_matrix",
    "zeroth_order_energies",
    "energies_first_order",
    "mixing_matrix",
    "states_first_order",
]


class PerturbationValidityWarning(UserWarning):
    """First-order admixture coefficients are too large to trust."""


@dataclass(frozen=True)
class DressedState:
    sector: Sector
    k: float
    energy: float
    coeffs: np.ndarray
    normalized: bool = False
    max_mixing: float = 0.0


def _delta(a: float, b: float) -> float:
    return 1.0 if abs(a - b) < 1e-9 else 0.0


def _sq(x: float) -> float:
    return math.sqrt(max(x, 0.0))


def _element(j: float, n: float, m: float, theta: float, A: float, nu: float) -> float:
    c = math.cos(theta)
    s = math.sin(theta)
    s2t = math.sin(2 * theta)
    ch2 = math.cos(theta / 2) ** 2
    sh2 = math.sin(theta / 2) ** 2

    diag = _delta(n, m)
    lower1 = _delta(n, m - 1)
    upper1 = _delta(n, m + 1)

    v = (A * ch2**2 + nu * s * ch2) * (j - m - 1) * (j - m) * diag
    v += (A * s**2 - nu * s2t) * (j * j - m * m) * diag
    v += (A * ch2 * s - nu * c * ch2 + nu / 2 * s**2) \
        * (j - m) * _sq((j + m) * (j - m + 1)) * lower1
    v += (A / 4 * s**2 - nu / 4 * s2t) \
        * _sq((j + m) * (j + m - 1)) * _sq((j - m + 1) * (j - m + 2)) * _delta(n, m - 2)
    v += (A * s * ch2 - nu * c * ch2 + nu / 2 * s**2) \
        * _sq((j - m) * (j + m + 1)) * (j - m - 1) * upper1
    v += (A * s * sh2 - nu * c * sh2 - nu / 2 * s**2) \
        * _sq((j + m) * (j - m + 1)) * (j + m - 1) * lower1
    v += (A * s * sh2 - nu * c * sh2 - nu / 2 * s**2) \
        * _sq((j - m) * (j + m + 1)) * (j + m) * upper1
    v += (A / 4 * s**2 - nu / 4 * s2t) \
        * _sq((j + m + 1) * (j + m + 2)) * _sq((j - m) * (j - m - 1)) * _delta(n, m + 2)
    v += (A * sh2**2 - nu * s * sh2) * (j + m) * (j + m - 1) * diag
    return v


def hprime_element(j: float, n: float, m: float, params: ModelParams) -> float:
    """Closed-form ``<psi0_jn| H' |psi0_jm>`` in meV.

    Zero unless ``|n - m| <= 2``; labels outside ``[-j, j]`` also give zero.
    """
    if abs(n) > j + 1e-9 or abs(m) > j + 1e-9:
        return 0.0
    theta = derive(params).theta
    return _element(j, n, m, theta, params.a_int, params.nu)


def hprime_matrix(s: Sector, params: ModelParams) -> np.ndarray:
    """Perturbation in the zeroth-order dressed basis, ``V[n, m]`` (pentadiagonal)."""
    theta = derive(params).theta
    ms = s.m_values
    v = np.zeros((s.dim, s.dim))
    for a, n in enumerate(ms):
        for b in range(max(0, a - 2), min(s.dim, a + 3)):
            v[a, b] = _element(s.j, n, ms[b], theta, params.a_int, params.nu)
    return v


def zeroth_order_energies(s: Sector, params: ModelParams) -> np.ndarray:
    d = derive(params)
    return s.n_total * d.Omega + s.m_values * d.G


def _require_gap(params: ModelParams) -> None:
    # derive() already rejects g <= 0, which is the only way to get G = 0
    if derive(params).G <= 0:
        raise DegenerateRotationError("G = 0: zeroth-order levels are degenerate")


def energies_first_order(s: Sector, params: ModelParams) -> np.ndarray:
    """First-order energies ``E_jm`` for ``m = -j..j`` (ascending m)."""
    _require_gap(params)
    d = derive(params)
    j, m = s.j, s.m_values
    A, nu, th = params.a_int, params.nu, d.theta
    ch = math.cos(th / 2)
    sh = math.sin(th / 2)
    return (s.n_total * d.Omega + d.G * m
            + (A * math.sin(th) ** 2 - nu * math.sin(2 * th)) * (j**2 - m**2)
            + (A * ch**4 + nu * math.sin(th) * ch**2) * (j - m - 1) * (j - m)
            + (A * sh**4 - nu * math.sin(th) * sh**2) * (j + m) * (j + m - 1))


def mixing_matrix(s: Sector, params: ModelParams) -> np.ndarray:
    """Coefficients of the first-order states in the zeroth-order dressed basis.

    Column k is ``e_k + sum_{n != k} V[n, k] / ((k - n) G) e_n``.
    """
    _require_gap(params)
    G = derive(params).G
    v = hprime_matrix(s, params)
    ms = s.m_values
    gaps = (ms[None, :] - ms[:, None]) * G
    np.fill_diagonal(gaps, 1.0)
    c = v / gaps
    np.fill_diagonal(c, 1.0)
    return c


def states_first_order(s: Sector, params: ModelParams, normalize: bool = False,
                       validity_threshold: float = 0.5) -> list[DressedState]:
    """First-order dressed states expanded in the bare Fock basis.

    States are left unnormalized unless ``normalize`` is set. A
    ``PerturbationValidityWarning`` is emitted when any admixture coefficient
    exceeds ``validity_threshold``.
    """
    c = mixing_matrix(s, params)
    vecs = wigner_d(s, derive(params).theta) @ c
    if normalize:
        vecs = vecs / np.linalg.norm(vecs, axis=0)
    energies = energies_first_order(s, params)
    offdiag = np.abs(c - np.eye(s.dim))
    out = []
    worst = 0.0
    for idx, k in enumerate(s.m_values):
        mix = float(offdiag[:, idx].max()) if s.dim > 1 else 0.0
        worst = max(worst, mix)
        out.append(DressedState(s, float(k), float(energies[idx]), vecs[:, idx].copy(),
                                normalize, mix))
    if worst > validity_threshold:
        warnings.warn(
            f"first-order admixture {worst:.3g} exceeds {validity_threshold} in sector "
            f"N={s.n_total}; perturbative states are unreliable",
            PerturbationValidityWarning, stacklevel=2)
    return out
