"""Physical parameters, derived rotation quantities and the exact sector Hamiltonian.

Energies are in meV with hbar = 1. The model Hamiltonian is

    H = w1 a^dag a + w2 b^dag b + g (a^dag b + b^dag a)
        + A b^dag b^dag b b - nu (a^dag b^dag b b + b^dag b^dag a b)

with ``a`` the cavity mode and ``b`` the exciton mode.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple

import numpy as np

from .hilbert import Sector

__all__ = [
    "MAX_SECTOR",
    "DegenerateRotationError",
    "ModelParams",
    "Derived",
    "derive",
    "free_hamiltonian",
    "interaction_hamiltonian",
    "sector_hamiltonian",
    "InitialState",
]

MAX_SECTOR = 20


class DegenerateRotationError(ValueError):
    """Raised when the dressing angle is undefined (g <= 0, so G may vanish)."""


class Derived(NamedTuple):
    Omega: float
    Delta: float
    G: float
    theta: float


@dataclass(frozen=True)
class ModelParams:
    """Cavity/exciton model constants, all in meV.

    ``Delta`` is the full cavity-exciton detuning ``omega1 - omega2`` so that
    the single-excitation polaritons sit at ``Omega -/+ G/2`` with
    ``G = sqrt(Delta**2 + 4 g**2)``.
    """

    omega1: float
    omega2: float
    g: float
    a_int: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        for name in ("omega1", "omega2", "g", "a_int", "nu"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if self.a_int < 0:
            raise ValueError(f"a_int must be >= 0, got {self.a_int}")
        if self.nu < 0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")

    @classmethod
    def from_detuning(cls, Omega: float, Delta: float, g: float,
                      a_over_g: float = 0.0, nu_over_a: float = 0.0) -> "ModelParams":
        """Build from centre frequency, detuning and the ratios A/g, nu/A."""
        a_int = a_over_g * g
        return cls(omega1=Omega + Delta / 2, omega2=Omega - Delta / 2, g=g,
                   a_int=a_int, nu=nu_over_a * a_int)

    @property
    def Omega(self) -> float:
        return (self.omega1 + self.omega2) / 2

    @property
    def Delta(self) -> float:
        return self.omega1 - self.omega2

    def with_detuning(self, Delta: float) -> "ModelParams":
        """Same centre frequency and couplings, new detuning."""
        return replace(self, omega1=self.Omega + Delta / 2, omega2=self.Omega - Delta / 2)

    def with_couplings(self, a_int: float, nu: float) -> "ModelParams":
        return replace(self, a_int=a_int, nu=nu)


def derive(params: ModelParams) -> Derived:
    """Return (Omega, Delta, G, theta) with theta = atan2(2g, Delta) in (0, pi)."""
    if params.g <= 0:
        raise DegenerateRotationError(
            f"g must be > 0 for a well-defined dressing angle, got g={params.g}")
    delta = params.Delta
    return Derived(params.Omega, delta, math.hypot(delta, 2 * params.g),
                   math.atan2(2 * params.g, delta))


def free_hamiltonian(s: Sector, params: ModelParams) -> np.ndarray:
    na = s.photons.astype(float)
    nb = s.excitons.astype(float)
    h = np.diag(params.omega1 * na + params.omega2 * nb)
    i = np.arange(s.dim - 1)
    # <i+1| a^dag b |i> with (na, nb) of state i
    off = np.sqrt((na[:-1] + 1) * nb[:-1]) * params.g
    h[i + 1, i] = off
    h[i, i + 1] = off
    return h


def interaction_hamiltonian(s: Sector, params: ModelParams) -> np.ndarray:
    """Bare-basis matrix of ``A b^dag b^dag b b - nu (a^dag b^dag b b + h.c.)``."""
    na = s.photons.astype(float)
    nb = s.excitons.astype(float)
    h = np.diag(params.a_int * nb * (nb - 1))
    i = np.arange(s.dim - 1)
    off = -params.nu * np.sqrt((na[:-1] + 1) * nb[:-1]) * (nb[:-1] - 1)
    h[i + 1, i] = off
    h[i, i + 1] = off
    return h


def sector_hamiltonian(s: Sector, params: ModelParams) -> np.ndarray:
    """Full Hamiltonian restricted to one number sector (real symmetric)."""
    return free_hamiltonian(s, params) + interaction_hamiltonian(s, params)


_SPEC_NUMBER = re.compile(r"^\s*n\s*=\s*(\d+)\s*$")
_SPEC_SUPER = re.compile(r"^\s*super\s*:\s*([\d\s,]+)$")


@dataclass(frozen=True)
class InitialState:
    """Exciton number-state superposition with the cavity in vacuum.

    ``amplitudes`` maps exciton number n to its complex amplitude; the
    corresponding bare vector is basis index 0 of sector n.
    """

    amplitudes: Mapping[int, complex] = field(default_factory=dict)
    max_n: int = 8

    def __post_init__(self):
        amps = {int(n): complex(c) for n, c in self.amplitudes.items() if c != 0}
        if not amps:
            raise ValueError("initial state has no nonzero amplitude")
        for n in amps:
            if n < 0:
                raise ValueError(f"exciton number must be >= 0, got {n}")
            if n > self.max_n:
                raise ValueError(f"exciton number {n} exceeds max_n={self.max_n}")
        norm = sum(abs(c) ** 2 for c in amps.values())
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"initial state must be normalized, sum |c|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", dict(sorted(amps.items())))

    @classmethod
    def number(cls, n: int, max_n: int = 8) -> "InitialState":
        return cls({n: 1.0}, max_n=max(max_n, n))

    @classmethod
    def superposition(cls, ns, max_n: int = 8) -> "InitialState":
        """Equal-weight superposition of distinct exciton number states."""
        ns = sorted(set(int(n) for n in ns))
        c = 1 / math.sqrt(len(ns))
        return cls({n: c for n in ns}, max_n=max([max_n, *ns]))

    @classmethod
    def parse(cls, text: str, max_n: int = 8) -> "InitialState":
        """Parse ``"n=2"``, ``"super:1,2"`` or ``"vacuum"``."""
        if text.strip() == "vacuum":
            return cls.number(0, max_n)
        if m := _SPEC_NUMBER.match(text):
            return cls.number(int(m.group(1)), max_n)
        if m := _SPEC_SUPER.match(text):
            ns = [int(tok) for tok in m.group(1).split(",") if tok.strip()]
            if len(ns) < 1:
                raise ValueError(f"empty superposition in {text!r}")
            return cls.superposition(ns, max_n)
        raise ValueError(f"cannot parse initial state {text!r}; use 'n=K' or 'super:K1,K2'")

    @property
    def sectors(self) -> list[int]:
        return list(self.amplitudes)

    def label(self) -> str:
        ns = self.sectors
        if len(ns) == 1:
            return f"n={ns[0]}"
        return "super:" + ",".join(str(n) for n in ns)
