"""Stationary physical spectrum: transition lines, Lorentzian sums, peaks and sweeps.

A line connects a dressed state of sector N (populated by the initial state)
to a dressed state of sector N - 1 through the exciton dipole ``B^dag``.
Its centre is the energy difference and its weight is

    |<psi0|psi_upper>|^2 * |<psi_upper| B^dag |psi_lower>|^2

The measured spectrum is the sum of Lorentzians ``2 g w / (g^2 + (w - c)^2)``
with ``g`` the spectrometer half-bandwidth.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .exactdiag import diagonalize
from .hilbert import Sector, dipole_raising, sector, wigner_d
from .model import MAX_SECTOR, InitialState, ModelParams, derive
from .perturbation import states_first_order

__all__ = [
    "MODES",
    "DIPOLES",
    "GridTooCoarse",
    "DressedBasis",
    "dressed_basis",
    "SpectrumLine",
    "LineList",
    "Spectrum",
    "Peak",
    "transition_lines",
    "lorentzian_sum",
    "evaluate",
    "default_grid",
    "find_peaks",
    "closed_form_single",
    "TrackingLost",
    "SweepResult",
    "detuning_sweep",
    "thread_cap",
]

MODES = ("perturbative", "exact")
DIPOLES = ("corrected", "bare")


class GridTooCoarse(ValueError):
    """Sample spacing is too large to locate Lorentzian maxima reliably."""


@dataclass(frozen=True)
class DressedBasis:
    """Dressed states of one sector: column ``i`` of ``vectors`` has label ``labels[i]``."""

    sector: Sector
    labels: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def dressed_basis(s: Sector, params: ModelParams, mode: str = "perturbative",
                  normalize: bool = False) -> DressedBasis:
    """Energies and eigenvectors of a sector in the requested approximation.

    In exact mode the eigenvectors are labelled by energy rank (``m = -j``
    for the lowest) and signed to overlap positively with the matching
    zeroth-order dressed state.
    """
    _check_mode(mode)
    if mode == "perturbative":
        states = states_first_order(s, params, normalize=normalize)
        return DressedBasis(s, s.m_values.copy(),
                            np.array([st.energy for st in states]),
                            np.column_stack([st.coeffs for st in states]))
    es = diagonalize(s, params)
    d = wigner_d(s, derive(params).theta)
    signs = np.sign(np.einsum("ij,ij->j", d, es.vectors))
    signs[signs == 0] = 1.0
    return DressedBasis(s, s.m_values.copy(), es.energies.copy(), es.vectors * signs)


@dataclass(frozen=True)
class SpectrumLine:
    center: float
    weight: float
    upper: tuple[float, float]
    lower: tuple[float, float]

    @property
    def key(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return self.upper, self.lower


class LineList(list):
    """List of ``SpectrumLine`` that also records how many lines were pruned."""

    def __init__(self, lines=(), pruned: int = 0):
        super().__init__(lines)
        self.pruned = pruned


def transition_lines(init: InitialState, params: ModelParams, mode: str = "perturbative",
                     dipole: str = "corrected", normalize: bool = False,
                     weight_floor: float = 1e-12) -> LineList:
    """Emission lines from every populated sector N to sector N - 1.

    ``dipole="bare"`` uses ``b^dag`` instead of the phase-space-filling
    corrected ``B^dag``. Lines with weight below ``weight_floor`` are
    dropped and counted in ``.pruned``.
    """
    _check_mode(mode)
    if dipole not in DIPOLES:
        raise ValueError(f"dipole must be one of {DIPOLES}, got {dipole!r}")
    nu_dip = params.nu if dipole == "corrected" else 0.0
    kept, pruned = [], 0
    for n, amp in init.amplitudes.items():
        if n == 0:
            continue
        if n > MAX_SECTOR:
            raise ValueError(f"sector N={n} exceeds cap {MAX_SECTOR}")
        up = dressed_basis(sector(n), params, mode, normalize)
        lo = dressed_basis(sector(n - 1), params, mode, normalize)
        t = up.vectors.T @ dipole_raising(lo.sector, nu_dip) @ lo.vectors
        # the initial state is basis index 0 of sector n (no photons)
        pop = abs(amp) ** 2 * up.vectors[0, :] ** 2
        w = pop[:, None] * t**2
        for li, l in enumerate(up.labels):
            for mi, m in enumerate(lo.labels):
                if w[li, mi] < weight_floor:
                    pruned += 1
                    continue
                kept.append(SpectrumLine(float(up.energies[li] - lo.energies[mi]),
                                         float(w[li, mi]),
                                         (up.sector.j, float(l)), (lo.sector.j, float(m))))
    return LineList(kept, pruned)


def lorentzian_sum(centers, weights, gamma: float, omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    for c, w in zip(centers, weights):
        out += 2 * gamma * w / (gamma**2 + (omega - c) ** 2)
    return out


def _lorentzian_slope(centers, weights, gamma: float, x: float) -> float:
    c = np.asarray(centers)
    w = np.asarray(weights)
    d = x - c
    return float(np.sum(-4 * gamma * w * d / (gamma**2 + d**2) ** 2))


@dataclass(frozen=True)
class Spectrum:
    gamma: float
    grid: np.ndarray
    values: np.ndarray
    lines: tuple = ()
    pruned: int = 0

    def __call__(self, omega):
        """Evaluate the underlying Lorentzian model off-grid."""
        return lorentzian_sum([l.center for l in self.lines], [l.weight for l in self.lines],
                              self.gamma, omega)


def evaluate(lines, gamma: float, grid) -> Spectrum:
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a strictly ascending 1-D array")
    lines = tuple(lines)
    values = lorentzian_sum([l.center for l in lines], [l.weight for l in lines], gamma, grid)
    return Spectrum(gamma, grid, values, lines, getattr(lines, "pruned", 0))


def default_grid(lines, gamma: float, pad: float = 0.0, points: int = 4001,
                 oversample: float = 5.0) -> np.ndarray:
    """Uniform grid covering every line with ``20 gamma + pad`` margin.

    Densified beyond ``points`` so that the spacing is ``gamma / oversample``
    or finer.
    """
    centers = [l.center for l in lines]
    if not centers:
        raise ValueError("no lines to place a grid around")
    lo = min(centers) - 20 * gamma - pad
    hi = max(centers) + 20 * gamma + pad
    n = max(points, int(math.ceil((hi - lo) * oversample / gamma)) + 1)
    return np.linspace(lo, hi, n)


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    label: tuple | None = None
    merged: int = 0

    @property
    def resolved(self) -> bool:
        return self.merged == 0


def _vertex(x0, x1, x2, y0, y1, y2) -> float:
    # vertex of the parabola through three (possibly unevenly spaced) points
    d0 = (x0 - x1) * (x0 - x2)
    d1 = (x1 - x0) * (x1 - x2)
    d2 = (x2 - x0) * (x2 - x1)
    a = y0 / d0 + y1 / d1 + y2 / d2
    b = -(y0 * (x1 + x2) / d0 + y1 * (x0 + x2) / d1 + y2 * (x0 + x1) / d2)
    if a >= 0:
        return x1
    return min(max(-b / (2 * a), x0), x2)


def find_peaks(spec: Spectrum, rel_floor: float = 1e-4,
               resolution: float | None = None) -> list[Peak]:
    """Resolved maxima of a sampled spectrum.

    Strict local maxima above ``rel_floor * max(S)`` are refined by parabolic
    interpolation and, when the spectrum carries its lines, polished to the
    exact stationary point of the Lorentzian model. Maxima closer than
    ``resolution`` (default ``gamma``) are merged into the taller one.
    """
    x, y = spec.grid, spec.values
    gamma = spec.gamma
    if resolution is None:
        resolution = gamma
    if len(x) < 3:
        raise GridTooCoarse("need at least three samples")
    step = float(np.diff(x).max())
    if step >= gamma / 4:
        raise GridTooCoarse(f"grid step {step:.3g} must be < gamma/4 = {gamma / 4:.3g}")

    centers = np.array([l.center for l in spec.lines])
    weights = np.array([l.weight for l in spec.lines])
    floor = rel_floor * y.max()
    inner = np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]) & (y[1:-1] >= floor))[0] + 1

    found = []
    for i in inner:
        pos = _vertex(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1])
        if len(centers):
            lo_s = _lorentzian_slope(centers, weights, gamma, x[i - 1])
            hi_s = _lorentzian_slope(centers, weights, gamma, x[i + 1])
            if lo_s > 0 > hi_s:
                pos = brentq(lambda t: _lorentzian_slope(centers, weights, gamma, t),
                             x[i - 1], x[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            height = float(lorentzian_sum(centers, weights, gamma, [pos])[0])
            contrib = weights / (gamma**2 + (pos - centers) ** 2)
            label = spec.lines[int(contrib.argmax())].key
        else:
            height = float(np.interp(pos, x, y))
            label = None
        found.append(Peak(float(pos), height, label))

    merged: list[Peak] = []
    for p in sorted(found, key=lambda p: p.position):
        if merged and p.position - merged[-1].position < resolution:
            q = merged[-1]
            keep = p if p.height > q.height else q
            merged[-1] = Peak(keep.position, keep.height, keep.label, q.merged + 1)
        else:
            merged.append(p)
    return merged


def closed_form_single(params: ModelParams, gamma: float, grid) -> Spectrum:
    """Two-Lorentzian spectrum of a single exciton emitting into the empty cavity."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    d = derive(params)
    up = math.sin(d.theta / 2) ** 4
    down = math.cos(d.theta / 2) ** 4
    grid = np.asarray(grid, dtype=float)
    values = (2 * gamma * up / (gamma**2 + (grid - d.Omega - d.G / 2) ** 2)
              + 2 * gamma * down / (gamma**2 + (grid - d.Omega + d.G / 2) ** 2))
    lines = (SpectrumLine(d.Omega - d.G / 2, down, (0.5, -0.5), (0.0, 0.0)),
             SpectrumLine(d.Omega + d.G / 2, up, (0.5, 0.5), (0.0, 0.0)))
    return Spectrum(gamma, grid, values, lines)


def thread_cap() -> int:
    """Worker count for sweeps, capped by ``EXC_SPECTRA_THREADS``."""
    n = os.cpu_count() or 1
    env = os.environ.get("EXC_SPECTRA_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            raise ValueError(f"EXC_SPECTRA_THREADS must be an integer, got {env!r}") from None
    return n


@dataclass(frozen=True)
class TrackingLost:
    """A traced line lost its own resolved peak (merged or fell below the floor)."""

    delta: float
    trace: str
    reason: str


@dataclass
class SweepResult:
    """Per-detuning trace table.

    Rows follow ``deltas``; columns follow ``trace_ids`` (``p1`` is the
    highest-frequency line at the first detuning). ``position`` is the
    refined peak position where the line owns a resolved peak and the line
    centre otherwise; ``height`` is the spectrum at that position.
    """

    deltas: np.ndarray
    trace_ids: list[str]
    trace_keys: list
    center: np.ndarray
    weight: np.ndarray
    position: np.ndarray
    height: np.ndarray
    resolved: np.ndarray
    peak_count: np.ndarray
    events: list[TrackingLost] = field(default_factory=list)

    def trace(self, trace_id: str) -> int:
        return self.trace_ids.index(trace_id)

    def rows(self):
        """(delta, trace id, position, height, resolved) in table order."""
        for k, delta in enumerate(self.deltas):
            for t, tid in enumerate(self.trace_ids):
                yield (float(delta), tid, float(self.position[k, t]),
                       float(self.height[k, t]), bool(self.resolved[k, t]))

    def crossings(self, a: str, b: str) -> int:
        """Number of times the position traces ``a`` and ``b`` swap order."""
        gap = self.position[:, self.trace(a)] - self.position[:, self.trace(b)]
        gap = gap[np.isfinite(gap) & (gap != 0)]
        return int(np.count_nonzero(np.diff(np.sign(gap))))

    def single_exciton_summary(self) -> dict[str, np.ndarray]:
        """Height difference (lower minus upper polariton peak) and separation."""
        if len(self.trace_ids) != 2:
            raise ValueError("summary needs exactly two traces (single-exciton sweep)")
        hi, lo = 0, 1
        return {
            "delta": self.deltas.copy(),
            "height_difference": self.height[:, lo] - self.height[:, hi],
            "separation": self.position[:, hi] - self.position[:, lo],
        }


def _sweep_point(init, params, gamma, mode, dipole, rel_floor, normalize):
    lines = transition_lines(init, params, mode, dipole, normalize, weight_floor=0.0)
    visible = LineList([l for l in lines if l.weight >= 1e-12])
    if not visible:
        visible = lines
    grid = default_grid(visible, gamma, pad=derive(params).G)
    spec = evaluate(visible, gamma, grid)
    peaks = find_peaks(spec, rel_floor=rel_floor)
    return lines, spec, peaks


def detuning_sweep(init: InitialState, params_base: ModelParams, delta_grid, gamma: float,
                   mode: str = "perturbative", dipole: str = "corrected",
                   rel_floor: float = 1e-4, normalize: bool = False,
                   threads: int | None = None) -> SweepResult:
    """Spectra and tracked peak positions along a detuning grid.

    Each emission line keeps its dressed-state labels along the sweep, since
    the dressing angle varies continuously with detuning; a peak is assigned
    to the line that dominates the spectrum at the peak position.
    """
    deltas = np.asarray(delta_grid, dtype=float)
    if deltas.ndim != 1 or len(deltas) == 0:
        raise ValueError("delta_grid must be a non-empty 1-D sequence")
    points = [params_base.with_detuning(float(d)) for d in deltas]
    workers = min(threads or thread_cap(), len(points))

    def run(p):
        return _sweep_point(init, p, gamma, mode, dipole, rel_floor, normalize)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, points))
    else:
        results = [run(p) for p in points]

    first = results[0][0]
    keys = [l.key for l in sorted(first, key=lambda l: -l.center)]
    ids = [f"p{i + 1}" for i in range(len(keys))]
    shape = (len(deltas), len(keys))
    center = np.full(shape, np.nan)
    weight = np.zeros(shape)
    position = np.full(shape, np.nan)
    height = np.full(shape, np.nan)
    resolved = np.zeros(shape, dtype=bool)
    counts = np.zeros(len(deltas), dtype=int)
    events = []
    col = {k: i for i, k in enumerate(keys)}

    for k, (lines, spec, peaks) in enumerate(results):
        counts[k] = len(peaks)
        for l in lines:
            t = col[l.key]
            center[k, t] = l.center
            weight[k, t] = l.weight
        owned = {p.label: p for p in peaks if p.label is not None}
        for t, key in enumerate(keys):
            p = owned.get(key)
            if p is not None and p.resolved:
                position[k, t] = p.position
                height[k, t] = p.height
                resolved[k, t] = True
            else:
                position[k, t] = center[k, t]
                height[k, t] = float(spec(center[k, t]))
                if k > 0 and resolved[k - 1, t]:
                    reason = "merged" if p is not None else "absent"
                    events.append(TrackingLost(float(deltas[k]), ids[t], reason))
    return SweepResult(deltas, ids, keys, center, weight, position, height, resolved,
                       counts, events)
