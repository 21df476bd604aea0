"""Command-line front end.

    exc-spectra spectrum --config run.toml [--mode exact] [--dipole bare] [--out DIR]
    exc-spectra sweep --config run.toml
    exc-spectra compare-oracle --config run.toml
    exc-spectra timedomain --config run.toml [--gamma-t 50]
    exc-spectra figure 4 --out figs

Exit codes: 0 ok, 1 oracle scaling check failed, 2 invalid configuration,
3 computation error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import __version__
from .config import FORMATS, PRESETS, ConfigError, RunConfig, load_config, preset
from .exactdiag import AmbiguousLabel, diagonalize
from .hilbert import sector
from .model import DegenerateRotationError, derive
from .output import fmt_float, write_csv, write_json
from .perturbation import PerturbationValidityWarning, energies_first_order
from .spectrum import (DIPOLES, MODES, GridTooCoarse, default_grid, detuning_sweep, evaluate,
                       find_peaks, thread_cap, transition_lines)
from .timedomain import (beat_period, correlation_kernel, finite_time_spectrum,
                         time_averaged_spectrum)


class ComputationError(RuntimeError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _describe(cfg: RunConfig) -> dict:
    p = cfg.params
    d = {"omega1_meV": p.omega1, "omega2_meV": p.omega2, "g_meV": p.g, "A_meV": p.a_int,
         "nu_meV": p.nu, **cfg.ratios}
    out = {
        "params": d,
        "init": cfg.init.label(),
        "gamma_meV": cfg.gamma,
        "mode": cfg.mode,
        "dipole": cfg.dipole,
        "normalize": cfg.normalize,
        "rel_floor": cfg.rel_floor,
    }
    try:
        dv = derive(p)
        out["derived"] = {"Omega_meV": dv.Omega, "Delta_meV": dv.Delta, "G_meV": dv.G,
                          "theta_rad": dv.theta}
    except DegenerateRotationError:
        out["derived"] = {"Omega_meV": p.Omega, "Delta_meV": p.Delta,
                          "G_meV": math.hypot(p.Delta, 2 * p.g), "theta_rad": None}
    return out


def _guarded(fn, *args, **kw):
    """Run a computation, translating library errors into field-level messages."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PerturbationValidityWarning)
        try:
            result = fn(*args, **kw)
        except DegenerateRotationError as e:
            raise ComputationError("model.g", str(e)) from None
        except AmbiguousLabel as e:
            raise ComputationError("spectrum.mode", str(e)) from None
        except GridTooCoarse as e:
            raise ComputationError("grid.points", str(e)) from None
    notes = sorted({str(w.message) for w in caught
                    if issubclass(w.category, PerturbationValidityWarning)})
    for n in notes:
        print(f"warning: {n}", file=sys.stderr)
    return result, notes


def _grid_for(cfg: RunConfig, lines) -> np.ndarray:
    if cfg.grid.automatic:
        if not lines:
            raise ComputationError("spectrum.init", f"{cfg.init.label()} has no emission lines")
        return default_grid(lines, cfg.gamma, pad=cfg.grid.pad, points=cfg.grid.points)
    return np.linspace(cfg.grid.lo, cfg.grid.hi, cfg.grid.points)


def _line_rows(lines):
    for l in sorted(lines, key=lambda l: (l.upper, l.lower)):
        yield (fmt_float(l.upper[0]), fmt_float(l.upper[1]), fmt_float(l.lower[1]),
               l.center, l.weight)


def cmd_spectrum(cfg: RunConfig, out_dir: str) -> dict:
    """Stationary spectrum, its lines and resolved peaks."""

    def run():
        lines = transition_lines(cfg.init, cfg.params, cfg.mode, cfg.dipole, cfg.normalize)
        grid = _grid_for(cfg, lines)
        spec = evaluate(lines, cfg.gamma, grid)
        return lines, spec, find_peaks(spec, cfg.rel_floor)

    (lines, spec, peaks), notes = _guarded(run)
    meta = _describe(cfg)
    meta.update({
        "kind": "spectrum",
        "grid": {"min_meV": spec.grid[0], "max_meV": spec.grid[-1], "points": len(spec.grid)},
        "line_count": len(lines),
        "pruned_lines": lines.pruned,
        "peak_count": len(peaks),
        "peaks": [{"position_meV": p.position, "height_per_meV": p.height,
                   "merged": p.merged, "line": list(p.label) if p.label else None}
                  for p in peaks],
        "warnings": notes,
    })
    spectrum_rows = list(zip(spec.grid, spec.values))
    line_header = ["upper_j", "upper_l", "lower_m", "center_meV", "weight"]
    if cfg.fmt == "csv":
        files = ["spectrum.csv", "lines.csv", "meta.json"]
        write_csv(os.path.join(out_dir, "spectrum.csv"), ["omega_meV", "S_per_meV"],
                  spectrum_rows)
        write_csv(os.path.join(out_dir, "lines.csv"), line_header, _line_rows(lines))
        write_json(os.path.join(out_dir, "meta.json"), {**meta, "files": files})
    else:
        files = ["spectrum.json"]
        write_json(os.path.join(out_dir, "spectrum.json"), {
            **meta, "files": files,
            "lines": [dict(zip(line_header, r)) for r in _line_rows(lines)],
            "spectrum": {"omega_meV": spec.grid, "S_per_meV": spec.values},
        })
    return {"files": files, "peak_count": len(peaks), "line_count": len(lines)}


def cmd_sweep(cfg: RunConfig, out_dir: str, threads: int | None = None) -> dict:
    """Detuning sweep with peaks tracked by the line that produces them."""
    deltas = cfg.sweep.grid()
    res, notes = _guarded(detuning_sweep, cfg.init, cfg.params, deltas, cfg.gamma, cfg.mode,
                          cfg.dipole, cfg.rel_floor, cfg.normalize, threads)
    meta = _describe(cfg)
    meta.update({
        "kind": "sweep",
        "sweep": {"delta_min_meV": cfg.sweep.delta_min, "delta_max_meV": cfg.sweep.delta_max,
                  "delta_points": cfg.sweep.delta_points},
        "traces": {tid: [list(k[0]), list(k[1])] for tid, k in zip(res.trace_ids,
                                                                    res.trace_keys)},
        "peak_count": {fmt_float(d): int(c) for d, c in zip(res.deltas, res.peak_count)},
        "crossings": {f"{a}/{b}": res.crossings(a, b)
                      for a, b in zip(res.trace_ids, res.trace_ids[1:])},
        "tracking_lost": [{"delta_meV": e.delta, "trace": e.trace, "reason": e.reason}
                          for e in res.events],
        "warnings": notes,
    })
    header = ["delta_meV", "peak_id", "position_meV", "height_per_meV", "resolved"]
    summary = None
    if len(res.trace_ids) == 2:
        s = res.single_exciton_summary()
        summary = list(zip(s["delta"], s["height_difference"], s["separation"]))
        meta["height_difference_at_first_delta"] = float(s["height_difference"][0])
    if cfg.fmt == "csv":
        files = ["sweep.csv", "meta.json"]
        write_csv(os.path.join(out_dir, "sweep.csv"), header, res.rows())
        if summary is not None:
            files.insert(1, "summary.csv")
            write_csv(os.path.join(out_dir, "summary.csv"),
                      ["delta_meV", "height_difference_per_meV", "separation_meV"], summary)
        write_json(os.path.join(out_dir, "meta.json"), {**meta, "files": files})
    else:
        files = ["sweep.json"]
        payload = {**meta, "files": files, "rows": [dict(zip(header, r)) for r in res.rows()]}
        if summary is not None:
            payload["summary"] = [{"delta_meV": a, "height_difference_per_meV": b,
                                   "separation_meV": c} for a, b, c in summary]
        write_json(os.path.join(out_dir, "sweep.json"), payload)
    return {"files": files, "peak_count": meta["peak_count"], "crossings": meta["crossings"]}


SMALL_LAMBDA = 0.05


def oracle_errors(cfg: RunConfig, lam: float) -> dict[int, float]:
    """Max |E_first_order - E_exact| per sector over the configured detunings."""
    base = cfg.params
    nu_ratio = cfg.ratios.get("nu_over_a", base.nu / base.a_int if base.a_int > 0 else 0.0)
    out = {}
    for n in range(cfg.oracle.max_sector + 1):
        s = sector(n)
        err = 0.0
        for delta in cfg.oracle.deltas:
            p = base.with_detuning(delta).with_couplings(lam * base.g, nu_ratio * lam * base.g)
            e = np.abs(energies_first_order(s, p) - diagonalize(s, p).energies).max()
            err = max(err, float(e))
        out[n] = err
    return out


def cmd_compare_oracle(cfg: RunConfig, out_dir: str) -> dict:
    """First-order energies against exact diagonalization, with the quadratic scaling check.

    For consecutive nonzero lambdas a < b (both <= 0.05) and every sector
    with a nonzero error, err(b) / err(a) must lie in [r / 2, 2 r] with
    r = (b / a)^2. lambda = 0 must give zero error.
    """
    lams = sorted(set(cfg.oracle.lambdas))
    g = cfg.params.g
    errs, notes = _guarded(lambda: {lam: oracle_errors(cfg, lam) for lam in lams})
    checks = []
    passed = True
    scale = max(1.0, g * cfg.oracle.max_sector)
    if 0.0 in errs:
        worst = max(errs[0.0].values())
        ok = worst <= 1e-10 * scale
        checks.append({"check": "zero_coupling", "max_error_meV": worst, "ok": ok})
        passed &= ok
    small = [lam for lam in lams if 0 < lam <= SMALL_LAMBDA]
    for a, b in zip(small, small[1:]):
        r = (b / a) ** 2
        for n in range(cfg.oracle.max_sector + 1):
            ea, eb = errs[a][n], errs[b][n]
            if eb <= 1e-12 * scale:
                continue  # sectors 0 and 1 are exact at first order
            ratio = eb / ea if ea > 0 else math.inf
            ok = r / 2 <= ratio <= 2 * r
            checks.append({"check": "quadratic_scaling", "lambda_pair": [a, b], "sector": n,
                           "ratio": ratio, "window": [r / 2, 2 * r], "ok": ok})
            passed &= ok
    own = cfg.params.a_int / g if g > 0 else 0.0
    own_err = None
    if own > 0:
        own_err, more = _guarded(oracle_errors, cfg, own)
        notes = sorted(set(notes) | set(more))
    report = {
        "kind": "compare-oracle",
        **_describe(cfg),
        "oracle": {"lambdas": lams, "max_sector": cfg.oracle.max_sector,
                   "deltas_meV": list(cfg.oracle.deltas)},
        "errors_meV": {fmt_float(lam): {str(n): e for n, e in per.items()}
                       for lam, per in errs.items()},
        "configured_lambda": own,
        "configured_lambda_errors_meV": ({str(n): e for n, e in own_err.items()}
                                         if own_err is not None else None),
        "checks": checks,
        "passed": bool(passed),
        "warnings": notes,
    }
    write_json(os.path.join(out_dir, "oracle.json"), report)
    return {"files": ["oracle.json"], "passed": bool(passed)}


def cmd_timedomain(cfg: RunConfig, out_dir: str, gamma_t: float = 50.0,
                   average: bool = True) -> dict:
    """Finite-time spectrum (with interference terms) next to the stationary one."""
    if not gamma_t > 0:
        raise ConfigError("--gamma-t", f"must be > 0, got {gamma_t}")
    t = gamma_t / cfg.gamma

    def run():
        lines = transition_lines(cfg.init, cfg.params, cfg.mode, cfg.dipole, cfg.normalize)
        grid = _grid_for(cfg, lines)
        stat = evaluate(lines, cfg.gamma, grid)
        k = correlation_kernel(cfg.init, cfg.params, cfg.mode, cfg.dipole, cfg.normalize)
        fin = (time_averaged_spectrum(k, cfg.gamma, t, grid) if average
               else finite_time_spectrum(k, cfg.gamma, t, grid))
        return stat, fin, beat_period(k)

    (stat, fin, period), notes = _guarded(run)
    peak = float(stat.values.max())
    dev = (fin.values - stat.values) / peak
    meta = _describe(cfg)
    meta.update({
        "kind": "timedomain",
        "t_per_meV": t,
        "gamma_t": gamma_t,
        "time_averaged": average,
        "beat_period_per_meV": period,
        "max_relative_deviation": float(np.abs(dev).max()),
        "warnings": notes,
    })
    header = ["omega_meV", "S_finite", "S_stationary", "deviation"]
    rows = zip(stat.grid, fin.values, stat.values, dev)
    if cfg.fmt == "csv":
        files = ["timedomain.csv", "meta.json"]
        write_csv(os.path.join(out_dir, "timedomain.csv"), header, rows)
        write_json(os.path.join(out_dir, "meta.json"), {**meta, "files": files})
    else:
        files = ["timedomain.json"]
        write_json(os.path.join(out_dir, "timedomain.json"),
                   {**meta, "files": files, "rows": [dict(zip(header, r)) for r in rows]})
    return {"files": files, "max_relative_deviation": meta["max_relative_deviation"]}


def cmd_figure(number: int, out_root: str, mode=None, dipole=None, fmt=None,
               threads: int | None = None) -> dict:
    """Regenerate the data behind one figure and write a manifest."""
    runs = preset(number)
    fig_dir = os.path.join(out_root, f"fig{number}")
    entries = []
    for name, kind, cfg, raw in runs:
        cfg = cfg.with_overrides(mode=mode, dipole=dipole, fmt=fmt)
        run_dir = os.path.join(fig_dir, name)
        if kind == "spectrum":
            summary = cmd_spectrum(cfg, run_dir)
        else:
            summary = cmd_sweep(cfg, run_dir, threads)
        entries.append({"name": name, "kind": kind, "config": raw, **_describe(cfg),
                        "directory": name, **summary})
    manifest = {"figure": number, "title": PRESETS[number]["title"], "version": __version__,
                "runs": entries}
    write_json(os.path.join(fig_dir, "manifest.json"), manifest)
    return manifest


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="exc-spectra",
                                 description="Emission spectra of excitons in a microcavity.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", metavar="PATH", help="TOML run configuration")
        p.add_argument("--mode", choices=MODES, help="dressed states: first order or exact")
        p.add_argument("--dipole", choices=DIPOLES, help="emission operator")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--format", choices=FORMATS, dest="fmt")
        return p

    p = common(sub.add_parser("spectrum", help="stationary spectrum, lines and peaks"))
    p.add_argument("--preset", type=int, choices=sorted(PRESETS), metavar="FIG",
                   help="same as 'figure FIG'")
    p = common(sub.add_parser("sweep", help="peak positions and heights versus detuning"))
    p.add_argument("--preset", type=int, choices=sorted(PRESETS), metavar="FIG",
                   help="same as 'figure FIG'")
    p = common(sub.add_parser("compare-oracle",
                              help="first-order energies against exact diagonalization"))
    p.add_argument("--lambdas", type=float, nargs="+", metavar="L",
                   help="A/g values to test (overrides the config)")
    p = common(sub.add_parser("timedomain",
                              help="finite-time spectrum against the stationary one"))
    p.add_argument("--gamma-t", type=float, default=50.0, help="gamma times elapsed time")
    p.add_argument("--instant", action="store_true",
                   help="no averaging over the slowest beat period")
    p = common(sub.add_parser("figure", help="regenerate figure data"), config=False)
    p.add_argument("number", type=int, choices=sorted(PRESETS))
    return ap


def _run(args) -> int:
    threads = thread_cap() if args.command in ("sweep", "figure") else None
    preset_fig = getattr(args, "preset", None)
    if args.command == "figure" or preset_fig is not None:
        number = args.number if args.command == "figure" else preset_fig
        m = cmd_figure(number, args.out or "out", args.mode, args.dipole, args.fmt, threads)
        print(f"figure {number}: {len(m['runs'])} run(s) in "
              f"{os.path.join(args.out or 'out', f'fig{number}')}")
        return 0

    if not args.config:
        raise ConfigError("--config", "required (or use --preset / the figure command)")
    cfg = load_config(args.config).with_overrides(args.mode, args.dipole, args.out, args.fmt)
    out = cfg.out_dir
    if args.command == "spectrum":
        r = cmd_spectrum(cfg, out)
        print(f"{r['line_count']} lines, {r['peak_count']} resolved peaks -> {out}")
    elif args.command == "sweep":
        cmd_sweep(cfg, out, threads)
        print(f"{cfg.sweep.delta_points} detunings -> {out}")
    elif args.command == "compare-oracle":
        if args.lambdas:
            for i, lam in enumerate(args.lambdas):
                if not (math.isfinite(lam) and lam >= 0):
                    raise ConfigError(f"--lambdas[{i}]", f"must be finite and >= 0, got {lam}")
            cfg = replace(cfg, oracle=replace(cfg.oracle, lambdas=tuple(args.lambdas)))
        r = cmd_compare_oracle(cfg, out)
        print(f"oracle scaling {'passed' if r['passed'] else 'FAILED'} -> {out}")
        return 0 if r["passed"] else 1
    elif args.command == "timedomain":
        r = cmd_timedomain(cfg, out, args.gamma_t, not args.instant)
        print(f"max relative deviation {r['max_relative_deviation']:.3e} -> {out}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ComputationError as e:
        print(f"computation error: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        # thread cap or other input validation surfacing from the library
        if "EXC_SPECTRA_THREADS" in str(e):
            print(f"config error: EXC_SPECTRA_THREADS: {e}", file=sys.stderr)
            return 2
        print(f"computation error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
