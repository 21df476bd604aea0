"""Two-time dipole correlation and the finite-time filtered spectrum.

With dressed states ``|l>`` (upper sector) and ``|m>`` (lower sector),

    G(t1, t2) = sum_{l, n, m} amp * exp(i w_lm t2) * exp(-i w_nm t1)

where ``amp = <psi0|l><l|B^dag|m><m|B|n><n|psi0>``. The spectrometer output
after an excitation time ``t`` is

    S(w) = 2 gamma int_0^t int_0^t exp(-(gamma - i w)(t - t2))
                                   exp(-(gamma + i w)(t - t1)) G(t1, t2)

Unlike the stationary Lorentzian sum, the l != n interference terms are
kept. Times are in 1/meV (1/meV is about 0.6582 ps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import dipole_raising, sector
from .model import MAX_SECTOR, InitialState, ModelParams
from .spectrum import DIPOLES, Spectrum, dressed_basis

__all__ = [
    "CorrelationKernel",
    "correlation_kernel",
    "finite_time_spectrum",
    "finite_time_spectrum_quad",
    "beat_period",
    "time_averaged_spectrum",
]


@dataclass(frozen=True)
class CorrelationKernel:
    """Term list of G(t1, t2); arrays share one index per (l, n, m) triple."""

    amplitudes: np.ndarray
    freq_upper: np.ndarray
    freq_lower: np.ndarray

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __call__(self, t1, t2) -> np.ndarray:
        t1 = np.asarray(t1, dtype=float)[..., None]
        t2 = np.asarray(t2, dtype=float)[..., None]
        phase = np.exp(1j * self.freq_upper * t2 - 1j * self.freq_lower * t1)
        return np.sum(self.amplitudes * phase, axis=-1)

    def diagonal(self) -> "CorrelationKernel":
        """Only the l == n terms, i.e. what the stationary formula keeps."""
        keep = self.freq_upper == self.freq_lower
        return CorrelationKernel(self.amplitudes[keep], self.freq_upper[keep],
                                 self.freq_lower[keep])


def correlation_kernel(init: InitialState, params: ModelParams, mode: str = "perturbative",
                       dipole: str = "corrected", normalize: bool = False,
                       amp_floor: float = 0.0) -> CorrelationKernel:
    if dipole not in DIPOLES:
        raise ValueError(f"dipole must be one of {DIPOLES}, got {dipole!r}")
    nu_dip = params.nu if dipole == "corrected" else 0.0
    amps, fu, fl = [], [], []
    for n, c in init.amplitudes.items():
        if n == 0:
            continue
        if n > MAX_SECTOR:
            raise ValueError(f"sector N={n} exceeds cap {MAX_SECTOR}")
        up = dressed_basis(sector(n), params, mode, normalize)
        lo = dressed_basis(sector(n - 1), params, mode, normalize)
        t = up.vectors.T @ dipole_raising(lo.sector, nu_dip) @ lo.vectors
        proj = c * up.vectors[0, :]  # <l|psi0>, real dressed vectors
        for mi in range(lo.sector.dim):
            for li in range(up.sector.dim):
                for ni in range(up.sector.dim):
                    a = np.conj(proj[li]) * proj[ni] * t[li, mi] * t[ni, mi]
                    if abs(a) <= amp_floor:
                        continue
                    amps.append(a)
                    fu.append(up.energies[li] - lo.energies[mi])
                    fl.append(up.energies[ni] - lo.energies[mi])
    return CorrelationKernel(np.array(amps, dtype=complex), np.array(fu, dtype=float),
                             np.array(fl, dtype=float))


def _window(omega, freq, gamma, t):
    # int_0^t exp(-(gamma + i w)(t - s)) exp(-i f s) ds, closed form
    z = gamma + 1j * (omega[:, None] - freq[None, :])
    return (np.exp(-1j * freq[None, :] * t) - np.exp(-(gamma + 1j * omega[:, None]) * t)) / z


def _check(gamma, t):
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")


def finite_time_spectrum(kernel: CorrelationKernel, gamma: float, t: float, grid) -> Spectrum:
    """Filtered spectrum after excitation time ``t``, evaluated term by term."""
    _check(gamma, t)
    omega = np.asarray(grid, dtype=float)
    if len(kernel) == 0:
        return Spectrum(gamma, omega, np.zeros_like(omega))
    i1 = _window(omega, kernel.freq_lower, gamma, t)
    i2 = np.conj(_window(omega, kernel.freq_upper, gamma, t))
    s = 2 * gamma * np.sum(kernel.amplitudes[None, :] * i1 * i2, axis=1)
    return Spectrum(gamma, omega, s.real.copy())


def finite_time_spectrum_quad(kernel: CorrelationKernel, gamma: float, t: float, grid,
                              nodes: int = 200) -> np.ndarray:
    """Same quantity by Gauss-Legendre double quadrature of G(t1, t2).

    Returns the complex values so callers can check the imaginary part.
    """
    _check(gamma, t)
    omega = np.asarray(grid, dtype=float)
    x, w = np.polynomial.legendre.leggauss(nodes)
    ts = t * (x + 1) / 2
    ws = w * t / 2
    g = kernel(ts[:, None], ts[None, :])  # g[p, q] = G(t1=ts[p], t2=ts[q])
    f1 = np.exp(-(gamma + 1j * omega[:, None]) * (t - ts[None, :])) * ws
    f2 = np.exp(-(gamma - 1j * omega[:, None]) * (t - ts[None, :])) * ws
    return 2 * gamma * np.einsum("wp,pq,wq->w", f1, g, f2)


def beat_period(kernel: CorrelationKernel, tol: float = 1e-9) -> float:
    """Period of the slowest interference beat; 0 when there is none."""
    beats = np.abs(kernel.freq_upper - kernel.freq_lower)
    beats = beats[(beats > tol) & (np.abs(kernel.amplitudes) > 0)]
    if beats.size == 0:
        return 0.0
    return 2 * math.pi / float(beats.min())


def _mean_exp(lam, t, span):
    # mean of exp(lam * s) over s in [t, t + span]
    lam = np.asarray(lam, dtype=complex)
    x = lam * span
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    ratio = np.where(small, 1 + x / 2, np.expm1(safe) / safe)
    return np.exp(lam * t) * ratio


def time_averaged_spectrum(kernel: CorrelationKernel, gamma: float, t: float, grid,
                           period: float | None = None) -> Spectrum:
    """Finite-time spectrum averaged over ``[t, t + period]``.

    ``period`` defaults to the slowest beat period of the kernel; the
    average is taken analytically.
    """
    _check(gamma, t)
    omega = np.asarray(grid, dtype=float)
    if len(kernel) == 0:
        return Spectrum(gamma, omega, np.zeros_like(omega))
    if period is None:
        period = beat_period(kernel)
    if period <= 0:
        return finite_time_spectrum(kernel, gamma, t, omega)
    wa = kernel.freq_upper[None, :]
    wb = kernel.freq_lower[None, :]
    w = omega[:, None]
    denom = (gamma - 1j * (w - wa)) * (gamma + 1j * (w - wb))
    # (e^{i wa s} - e^{-(gamma - i w) s}) (e^{-i wb s} - e^{-(gamma + i w) s})
    avg = (_mean_exp(1j * (wa - wb), t, period)
           - _mean_exp(1j * (wa - w) - gamma, t, period)
           - _mean_exp(1j * (w - wb) - gamma, t, period)
           + _mean_exp(np.full_like(w, -2 * gamma, dtype=complex), t, period))
    s = 2 * gamma * np.sum(kernel.amplitudes[None, :] * avg / denom, axis=1)
    return Spectrum(gamma, omega, s.real.copy())
