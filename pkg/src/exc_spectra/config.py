"""Run configuration: TOML file format, validation and figure presets.

Example file::

    [model]
    g = 5.0            # meV
    Omega = 0.0        # or omega1 / omega2
    Delta = 0.0        # omega1 - omega2
    a_over_g = 0.6     # or a_int (meV)
    nu_over_a = 0.3    # or nu (meV)

    [spectrum]
    init = "n=2"       # "n=K", "vacuum" or "super:1,2"
    gamma = 0.01       # meV
    mode = "perturbative"
    dipole = "corrected"
    rel_floor = 1e-4

    [grid]             # optional; default is an automatic grid around the lines
    min = -30.0
    max = 30.0
    points = 6001

    [sweep]
    delta_min = 0.0
    delta_max = 120.0
    delta_points = 121

    [oracle]
    lambdas = [0.0, 1e-3, 1e-2]
    max_sector = 4
    deltas = [-10.0, 0.0, 10.0]

    [output]
    dir = "out"
    format = "csv"
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model import MAX_SECTOR, InitialState, ModelParams
from .spectrum import DIPOLES, MODES

__all__ = ["ConfigError", "GridSpec", "SweepSpec", "OracleSpec", "RunConfig", "load_config",
           "config_from_dict", "preset", "PRESETS", "FORMATS"]

FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class GridSpec:
    lo: float | None = None
    hi: float | None = None
    points: int = 4001
    pad: float = 0.0

    @property
    def automatic(self) -> bool:
        return self.lo is None


@dataclass(frozen=True)
class SweepSpec:
    delta_min: float = 0.0
    delta_max: float = 120.0
    delta_points: int = 121

    def grid(self) -> np.ndarray:
        return np.linspace(self.delta_min, self.delta_max, self.delta_points)


@dataclass(frozen=True)
class OracleSpec:
    lambdas: tuple = (0.0, 1e-3, 1e-2)
    max_sector: int = 4
    deltas: tuple = (-10.0, 0.0, 10.0)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    init: InitialState
    gamma: float
    grid: GridSpec = GridSpec()
    mode: str = "perturbative"
    dipole: str = "corrected"
    rel_floor: float = 1e-4
    normalize: bool = False
    sweep: SweepSpec = SweepSpec()
    oracle: OracleSpec = OracleSpec()
    out_dir: str = "out"
    fmt: str = "csv"
    ratios: dict = field(default_factory=dict)  # a_over_g / nu_over_a as given, for echoing

    def with_overrides(self, mode=None, dipole=None, out_dir=None, fmt=None) -> "RunConfig":
        cfg = self
        if mode is not None:
            cfg = replace(cfg, mode=_choice("spectrum.mode", mode, MODES))
        if dipole is not None:
            cfg = replace(cfg, dipole=_choice("spectrum.dipole", dipole, DIPOLES))
        if out_dir is not None:
            cfg = replace(cfg, out_dir=str(out_dir))
        if fmt is not None:
            cfg = replace(cfg, fmt=_choice("output.format", fmt, FORMATS))
        return cfg


def _num(name, value, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(name, f"must be finite, got {value}")
    if positive and not value > 0:
        raise ConfigError(name, f"must be > 0, got {value}")
    if nonneg and value < 0:
        raise ConfigError(name, f"must be >= 0, got {value}")
    return value


def _int(name, value, lo=None, hi=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(name, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(name, f"must be <= {hi}, got {value}")
    return value


def _choice(name, value, options):
    if value not in options:
        raise ConfigError(name, f"must be one of {', '.join(options)}, got {value!r}")
    return value


def _table(data, name):
    t = data.get(name, {})
    if not isinstance(t, dict):
        raise ConfigError(name, "expected a table")
    return t


def _reject_unknown(table, prefix, known):
    for k in table:
        if k not in known:
            raise ConfigError(f"{prefix}.{k}", "unknown key")


def _model(t) -> tuple[ModelParams, dict]:
    _reject_unknown(t, "model", {"g", "Omega", "Delta", "omega1", "omega2", "a_over_g",
                                 "a_int", "nu_over_a", "nu"})
    if "g" not in t:
        raise ConfigError("model.g", "missing")
    g = _num("model.g", t["g"], nonneg=True)

    has_split = "omega1" in t or "omega2" in t
    has_center = "Omega" in t or "Delta" in t
    if has_split and has_center:
        raise ConfigError("model.omega1", "give either omega1/omega2 or Omega/Delta, not both")
    if has_split:
        for k in ("omega1", "omega2"):
            if k not in t:
                raise ConfigError(f"model.{k}", "missing")
        w1 = _num("model.omega1", t["omega1"])
        w2 = _num("model.omega2", t["omega2"])
    else:
        big = _num("model.Omega", t.get("Omega", 0.0))
        delta = _num("model.Delta", t.get("Delta", 0.0))
        w1, w2 = big + delta / 2, big - delta / 2

    ratios = {}
    if "a_over_g" in t and "a_int" in t:
        raise ConfigError("model.a_int", "give either a_over_g or a_int, not both")
    if "a_over_g" in t:
        ratios["a_over_g"] = _num("model.a_over_g", t["a_over_g"], nonneg=True)
        a = ratios["a_over_g"] * g
    else:
        a = _num("model.a_int", t.get("a_int", 0.0), nonneg=True)

    if "nu_over_a" in t and "nu" in t:
        raise ConfigError("model.nu", "give either nu_over_a or nu, not both")
    if "nu_over_a" in t:
        ratios["nu_over_a"] = _num("model.nu_over_a", t["nu_over_a"], nonneg=True)
        nu = ratios["nu_over_a"] * a
    else:
        nu = _num("model.nu", t.get("nu", 0.0), nonneg=True)
    return ModelParams(w1, w2, g, a, nu), ratios


def config_from_dict(data: dict) -> RunConfig:
    """Validate a parsed config mapping; raises ConfigError naming the field."""
    _reject_unknown(data, "config", {"model", "spectrum", "grid", "sweep", "oracle", "output"})
    params, ratios = _model(_table(data, "model"))

    sp = _table(data, "spectrum")
    _reject_unknown(sp, "spectrum", {"init", "gamma", "mode", "dipole", "rel_floor",
                                     "normalize"})
    init_s = sp.get("init", "n=1")
    if not isinstance(init_s, str):
        raise ConfigError("spectrum.init", f"expected a string, got {init_s!r}")
    try:
        init = InitialState.parse(init_s)
    except ValueError as e:
        raise ConfigError("spectrum.init", str(e)) from None
    if "gamma" not in sp:
        raise ConfigError("spectrum.gamma", "missing")
    gamma = _num("spectrum.gamma", sp["gamma"], positive=True)
    mode = _choice("spectrum.mode", sp.get("mode", "perturbative"), MODES)
    dipole = _choice("spectrum.dipole", sp.get("dipole", "corrected"), DIPOLES)
    rel_floor = _num("spectrum.rel_floor", sp.get("rel_floor", 1e-4), nonneg=True)
    normalize = sp.get("normalize", False)
    if not isinstance(normalize, bool):
        raise ConfigError("spectrum.normalize", f"expected true/false, got {normalize!r}")

    gt = _table(data, "grid")
    _reject_unknown(gt, "grid", {"min", "max", "points", "pad"})
    points = _int("grid.points", gt.get("points", 4001), lo=3)
    pad = _num("grid.pad", gt.get("pad", 0.0), nonneg=True)
    if ("min" in gt) != ("max" in gt):
        raise ConfigError("grid.max" if "min" in gt else "grid.min", "missing")
    if "min" in gt:
        lo, hi = _num("grid.min", gt["min"]), _num("grid.max", gt["max"])
        if not hi > lo:
            raise ConfigError("grid.max", f"must exceed grid.min ({lo}), got {hi}")
        grid = GridSpec(lo, hi, points, pad)
    else:
        grid = GridSpec(None, None, points, pad)

    sw = _table(data, "sweep")
    _reject_unknown(sw, "sweep", {"delta_min", "delta_max", "delta_points"})
    sweep = SweepSpec(_num("sweep.delta_min", sw.get("delta_min", 0.0)),
                      _num("sweep.delta_max", sw.get("delta_max", 120.0)),
                      _int("sweep.delta_points", sw.get("delta_points", 121), lo=1))
    if sweep.delta_max < sweep.delta_min:
        raise ConfigError("sweep.delta_max", "must be >= sweep.delta_min")

    ot = _table(data, "oracle")
    _reject_unknown(ot, "oracle", {"lambdas", "max_sector", "deltas"})
    lambdas = ot.get("lambdas", [0.0, 1e-3, 1e-2])
    deltas = ot.get("deltas", [-10.0, 0.0, 10.0])
    if not isinstance(lambdas, list) or not lambdas:
        raise ConfigError("oracle.lambdas", "expected a non-empty list")
    if not isinstance(deltas, list) or not deltas:
        raise ConfigError("oracle.deltas", "expected a non-empty list")
    oracle = OracleSpec(
        tuple(_num(f"oracle.lambdas[{i}]", v, nonneg=True) for i, v in enumerate(lambdas)),
        _int("oracle.max_sector", ot.get("max_sector", 4), lo=1, hi=MAX_SECTOR),
        tuple(_num(f"oracle.deltas[{i}]", v) for i, v in enumerate(deltas)),
    )

    out = _table(data, "output")
    _reject_unknown(out, "output", {"dir", "format"})
    out_dir = out.get("dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("output.dir", f"expected a non-empty string, got {out_dir!r}")
    fmt = _choice("output.format", out.get("format", "csv"), FORMATS)

    return RunConfig(params, init, gamma, grid, mode, dipole, rel_floor, normalize, sweep,
                     oracle, out_dir, fmt, ratios)


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as e:
        raise ConfigError("--config", f"cannot read {path}: {e.strerror}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("--config", f"invalid TOML in {path}: {e}") from None
    return config_from_dict(data)


# Figure presets. Each entry lists the runs that make up the figure; ``kind``
# is "spectrum" or "sweep". Phase-space filling is off from figure 3 on.
_FIG2_MODEL = {"g": 5.0, "a_over_g": 0.6}

PRESETS = {
    1: {
        "title": "single exciton: peak height difference and separation versus detuning",
        "runs": [
            ("sweep", "sweep", {"model": {"g": 6.0}, "spectrum": {"init": "n=1", "gamma": 0.01,
                                                                  "rel_floor": 1e-9},
                                "sweep": {"delta_min": 0.0, "delta_max": 120.0,
                                          "delta_points": 121}}),
        ],
    },
    2: {
        "title": "two excitons at resonance, with and without phase-space filling",
        "runs": [
            ("nu0", "spectrum", {"model": {**_FIG2_MODEL, "nu_over_a": 0.0},
                                 "spectrum": {"init": "n=2", "gamma": 0.01}}),
            ("nu0.3", "spectrum", {"model": {**_FIG2_MODEL, "nu_over_a": 0.3},
                                   "spectrum": {"init": "n=2", "gamma": 0.01}}),
        ],
    },
    3: {
        "title": "two excitons at increasing detuning",
        "runs": [
            (f"delta{d:g}", "spectrum", {"model": {**_FIG2_MODEL, "Delta": d},
                                         "spectrum": {"init": "n=2", "gamma": 0.01}})
            for d in (2.0, 100.0, 200.0)
        ],
    },
    4: {
        "title": "two excitons: tracked peak positions versus detuning",
        "runs": [
            ("sweep", "sweep", {"model": dict(_FIG2_MODEL),
                                "spectrum": {"init": "n=2", "gamma": 0.01},
                                "sweep": {"delta_min": 0.0, "delta_max": 200.0,
                                          "delta_points": 201}}),
        ],
    },
    5: {
        "title": "two excitons seen by a broadband spectrometer",
        "runs": [
            (f"delta{d:g}", "spectrum", {"model": {"g": 5.0, "a_over_g": 0.001, "Delta": d},
                                         "spectrum": {"init": "n=2", "gamma": 3.0}})
            for d in (0.0, 2.0)
        ],
    },
    6: {
        "title": "equal superposition of one and two excitons",
        "runs": [
            ("super", "spectrum", {"model": dict(_FIG2_MODEL),
                                   "spectrum": {"init": "super:1,2", "gamma": 0.01}}),
        ],
    },
}


def preset(figure: int) -> list[tuple[str, str, RunConfig, dict]]:
    """(run name, kind, config, raw mapping) for every run of a figure preset."""
    if figure not in PRESETS:
        raise ConfigError("figure", f"must be one of {sorted(PRESETS)}, got {figure}")
    return [(name, kind, config_from_dict(raw), raw)
            for name, kind, raw in PRESETS[figure]["runs"]]
