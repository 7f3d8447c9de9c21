"""Command-line front end: presets, config files, sweeps and fits.

Subcommands: run (one experiment from a preset or a TOML config), sweep
(a family of runs over one numeric parameter), fit (power law from a
sweep table).  All numeric output is CSV at full precision with LF line
endings; every run directory also receives a JSON summary of the scalar
results and a manifest with the fully resolved configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib
from importlib import metadata
from pathlib import Path

import numpy as np

from . import exact, minimal, observables
from .config import (SpecError, SystemSpec, classify_control, derive_geometry,
                     validate_spec, with_window)
from .dtwa import EngineError, IntegratorSettings, run_ensemble, validate_settings
from .fits import FitError, power_law_fit
from .presets import Preset, PresetError, get_preset, preset_names, variant_spec

ETA_REPORT_TIME = 15.0  # Jt at which the summary quotes the chirality


class ConfigError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


# ---------------------------------------------------------------------------
# output helpers

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _atomic_write(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename; no partial files remain."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _code_version() -> str:
    try:
        return metadata.version("crwsim")
    except metadata.PackageNotFoundError:  # pragma: no cover
        return "unknown"


def _manifest(out_dir: Path, spec: SystemSpec, settings: IntegratorSettings,
              n_traj: int, master_seed: int, extra: dict,
              elapsed: float) -> None:
    write_json(out_dir / "manifest.json", {
        "system": dataclasses.asdict(spec),
        "integrator": dataclasses.asdict(settings),
        "n_traj": n_traj,
        "master_seed": master_seed,
        "code_version": _code_version(),
        "wall_clock_s": elapsed,
        **extra,
    })


# ---------------------------------------------------------------------------
# configuration ingestion

def _coerce_section(section: dict, cls, label: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in section:
        if key not in known:
            raise ConfigError("UNKNOWN_KEY",
                              f"unknown key {key!r} in [{label}]; known: "
                              f"{', '.join(sorted(known))}")
    return cls(**section)


def load_config(path: str):
    """Parse a TOML experiment file into (spec, settings, n_traj, seed)."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("MISSING_CONFIG", f"no config file {path!r}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("BAD_CONFIG", f"{path}: {exc}") from None

    top_known = {"system", "integrator", "n_traj", "master_seed", "preset"}
    for key in doc:
        if key not in top_known:
            raise ConfigError("UNKNOWN_KEY",
                              f"unknown top-level key {key!r}; known: "
                              f"{', '.join(sorted(top_known))}")
    if "preset" in doc:
        base = get_preset(doc["preset"])
        spec, settings = base.spec, base.settings
        n_traj = base.n_traj
    else:
        spec, settings, n_traj = SystemSpec(), IntegratorSettings(), 4000
    if "system" in doc:
        merged = {**dataclasses.asdict(spec), **doc["system"]}
        spec = _coerce_section(merged, SystemSpec, "system")
    if "integrator" in doc:
        merged = {**dataclasses.asdict(settings), **doc["integrator"]}
        settings = _coerce_section(merged, IntegratorSettings, "integrator")
    n_traj = int(doc.get("n_traj", n_traj))
    master_seed = int(doc.get("master_seed", 1))
    return spec, settings, n_traj, master_seed


def _apply_overrides(args, spec: SystemSpec, settings: IntegratorSettings,
                     n_traj: int, master_seed: int):
    if args.dt is not None or args.tmax is not None:
        settings = dataclasses.replace(
            settings,
            dt=args.dt if args.dt is not None else settings.dt,
            t_max=args.tmax if args.tmax is not None else settings.t_max)
    if args.tmax is not None:
        spec = with_window(spec, settings.t_max, tight=True)
    if args.trajectories is not None:
        n_traj = args.trajectories
    if args.seed is not None:
        master_seed = args.seed
    return spec, settings, n_traj, master_seed


def _resolve(args):
    """Preset or config file plus CLI overrides -> a runnable experiment."""
    if args.config:
        spec, settings, n_traj, seed = load_config(args.config)
        preset = None
    else:
        preset = get_preset(args.preset)
        spec, settings, n_traj, seed = preset.spec, preset.settings, preset.n_traj, 1
    spec, settings, n_traj, seed = _apply_overrides(args, spec, settings,
                                                    n_traj, seed)
    validate_settings(settings)
    validate_spec(spec, t_max=settings.t_max)
    return preset, spec, settings, n_traj, seed


def _n_workers(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("CRWSIM_THREADS", "1"))


# ---------------------------------------------------------------------------
# pipelines

def _run_ensemble_variant(spec: SystemSpec, settings: IntegratorSettings,
                          n_traj: int, seed: int, out_dir: Path,
                          label: str, n_workers: int) -> dict:
    rec = run_ensemble(spec, settings, master_seed=seed, n_traj=n_traj,
                       n_workers=n_workers)
    obs = observables.compute_observables(rec)
    rad = observables.radiance(rec)

    cols = [obs.t_grid, obs.S_Tz]
    header = ["t", "S_Tz"]
    if obs.C_TT is not None:
        cols.append(obs.C_TT)
        header.append("C_TT")
    n_left = observables.photon_number(rec, -1, observables.SMOOTH_WINDOW)
    n_right = observables.photon_number(rec, spec.N + 1,
                                        observables.SMOOTH_WINDOW)
    cols += [obs.eta, n_left, n_right]
    header += ["eta", "n_left", "n_right"]
    write_csv(out_dir / f"timeseries-{label}.csv", header, zip(*cols))

    intensity = obs.intensity
    sites = np.arange(spec.m_min, spec.m_max + 1)
    rows = ((t, m, intensity[s, i])
            for s, t in enumerate(obs.t_grid)
            for i, m in enumerate(sites))
    write_csv(out_dir / f"intensity-{label}.csv", ["t", "m", "intensity"], rows)

    summary = {"label": label, "control": classify_control(spec).value,
               "n_traj": rec.n_traj,
               "T_h": rad.T_h if rad.valid else None,
               "I": rad.I if rad.valid else None,
               "eta_at_t": {str(ETA_REPORT_TIME):
                            observables.chirality(rec, t=ETA_REPORT_TIME)}}
    if rad.valid and obs.C_TT is not None:
        summary["C_TT_at_Th"] = observables.pair_correlation(rec, t=rad.T_h)
    return _jsonable(summary)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if np.isnan(f) else f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _run_minimal_variant(spec: SystemSpec, settings: IntegratorSettings,
                         out_dir: Path, label: str) -> dict:
    geom = derive_geometry(spec)
    M = minimal.coupling_matrix(spec, geom)
    lam_p, lam_m, bic = minimal.eigen_and_bic(M)
    t_grid = np.arange(0.0, settings.t_max + settings.dt / 2, settings.dt)
    sol = minimal.closed_form_amplitudes(M, t_grid, v_g=geom.v_g)
    chi = minimal.chirality_formulas(sol, spec, geom)
    write_csv(out_dir / f"amplitudes-{label}.csv",
              ["t", "abs_eps_T", "arg_eps_T", "abs_eps_C", "arg_eps_C",
               "script_G", "eta_exact", "eta_approx"],
              zip(t_grid, np.abs(sol.eps_T), np.angle(sol.eps_T),
                  np.abs(sol.eps_C), np.angle(sol.eps_C),
                  np.nan_to_num(chi.script_G), chi.eta_exact, chi.eta_approx))
    return _jsonable({
        "label": label,
        "lambda_plus": [lam_p.real, lam_p.imag],
        "lambda_minus": [lam_m.real, lam_m.imag],
        "bic": bic,
        "eta_exact_at_t": {str(ETA_REPORT_TIME):
                           float(np.interp(ETA_REPORT_TIME, t_grid,
                                           chi.eta_exact))},
    })


def _run_bic_variant(spec: SystemSpec, out_dir: Path, label: str) -> dict:
    geom = derive_geometry(spec)
    M = minimal.coupling_matrix(spec, geom)
    _, lam_m, bic = minimal.eigen_and_bic(M)
    prof = exact.bic_profile(spec)
    summary = {"label": label, "bic_matrix": bic,
               "bic_oracle": prof.exists,
               "abs_lambda_minus": abs(lam_m)}
    if prof.exists:
        sites = np.arange(spec.m_min, spec.m_max + 1)
        write_csv(out_dir / f"bic-profile-{label}.csv", ["m", "prob"],
                  zip(sites, prof.profile))
        summary["energy"] = prof.energy
    return _jsonable(summary)


def cmd_run(args) -> int:
    preset, spec, settings, n_traj, seed = _resolve(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_workers = _n_workers(args)
    kind = preset.kind if preset else "ensemble"
    variants = preset.variants if preset else (("default", {}),)

    start = time.monotonic()
    summaries = []
    for label, _ in variants:
        vspec = variant_spec(preset, label) if preset else spec
        if kind == "ensemble":
            summaries.append(_run_ensemble_variant(
                vspec, settings, n_traj, seed, out_dir, label, n_workers))
        elif kind == "minimal":
            summaries.append(_run_minimal_variant(vspec, settings, out_dir,
                                                  label))
        elif kind == "bic":
            summaries.append(_run_bic_variant(vspec, out_dir, label))
        else:
            raise ConfigError("BAD_KIND",
                              f"preset kind {kind!r} needs the sweep command")
    elapsed = time.monotonic() - start
    write_json(out_dir / "summary.json",
               {"preset": preset.name if preset else None,
                "variants": summaries})
    _manifest(out_dir, spec, settings, n_traj, seed,
              {"preset": preset.name if preset else None, "kind": kind},
              elapsed)
    return 0


_SWEEPABLE = {f.name for f in dataclasses.fields(SystemSpec)}


def _point_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([master_seed, index])
               .generate_state(1)[0])


def cmd_sweep(args) -> int:
    preset, spec, settings, n_traj, seed = _resolve(args)
    axis = args.axis or (preset.sweep_axis if preset else None)
    if axis is None:
        raise ConfigError("BAD_AXIS", "sweep needs --axis (or a sweep preset)")
    if axis not in _SWEEPABLE:
        raise ConfigError("BAD_AXIS",
                          f"axis {axis!r} is not a system parameter; "
                          f"choose from {', '.join(sorted(_SWEEPABLE))}")
    if args.values:
        values = [float(v) for v in args.values.split(",")]
    elif preset and preset.sweep_values:
        values = list(preset.sweep_values)
    else:
        raise ConfigError("BAD_AXIS", "sweep needs --values v1,v2,...")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_workers = _n_workers(args)
    variants = preset.variants if preset else (("default", {}),)
    is_int = axis in ("n", "N", "N_T", "N_C", "m_min", "m_max")

    start = time.monotonic()
    all_rows = {}
    for label, _ in variants:
        base = variant_spec(preset, label) if preset else spec
        rows = []
        for idx, value in enumerate(values):
            val = int(value) if is_int else value
            point = dataclasses.replace(base, **{axis: val})
            if axis in ("n", "N"):
                point = with_window(point, settings.t_max, tight=True)
            try:
                rec = run_ensemble(point, settings,
                                   master_seed=_point_seed(seed, idx),
                                   n_traj=n_traj, n_workers=n_workers)
                rad = observables.radiance(rec)
                eta = observables.chirality(rec, t=ETA_REPORT_TIME)
                ctt = (observables.pair_correlation(rec, t=rad.T_h)
                       if rad.valid and point.N_T >= 2 else np.nan)
                rows.append((val, rad.I, rad.T_h, eta, ctt))
            except (EngineError, SpecError) as exc:
                print(f"point {axis}={val} failed: {exc}", file=sys.stderr)
                rows.append((val, np.nan, np.nan, np.nan, np.nan))
        write_csv(out_dir / f"sweep-{label}.csv",
                  [axis, "I", "T_h", "eta", "C_TT"], rows)
        all_rows[label] = rows
    elapsed = time.monotonic() - start

    fits = {}
    for label, rows in all_rows.items():
        pts = [(v, i) for v, i, *_ in rows if np.isfinite(i) and i > 0]
        if len(pts) >= 3:
            fit = power_law_fit(pts)
            fits[label] = {"exponent": fit.exponent,
                           "prefactor": fit.prefactor,
                           "residual": fit.residual}
    write_json(out_dir / "summary.json",
               {"preset": preset.name if preset else None, "axis": axis,
                "values": values, "fits": fits})
    _manifest(out_dir, spec, settings, n_traj, seed,
              {"preset": preset.name if preset else None, "axis": axis,
               "sweep_values": values}, elapsed)
    return 0


def cmd_fit(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise ConfigError("MISSING_INPUT", f"no such file {path}")
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if args.x not in header or args.y not in header:
        raise ConfigError("BAD_COLUMNS",
                          f"columns {args.x!r}, {args.y!r} not all in {header}")
    ix, iy = header.index(args.x), header.index(args.y)
    pts = []
    for row in rows:
        x, y = float(row[ix]), float(row[iy])
        if np.isfinite(x) and np.isfinite(y):
            pts.append((x, y))
    fit = power_law_fit(pts)
    out = {"x": args.x, "y": args.y, "exponent": fit.exponent,
           "prefactor": fit.prefactor, "residual": fit.residual,
           "n_points": len(fit.points)}
    if args.out:
        write_json(Path(args.out), out)
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_presets(args) -> int:
    for name in preset_names():
        p = get_preset(name)
        print(f"{name:20s} {p.kind:9s} {p.description}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(sub: argparse.ArgumentParser, source: bool = True) -> None:
    if source:
        grp = sub.add_mutually_exclusive_group(required=True)
        grp.add_argument("--config", help="TOML experiment file")
        grp.add_argument("--preset", help="named preset (see 'presets')")
    sub.add_argument("--trajectories", type=int, default=None,
                     help="override the trajectory count")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the master seed")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker processes (default: CRWSIM_THREADS or 1)")
    sub.add_argument("--out-dir", default="out", help="output directory")
    sub.add_argument("--dt", type=float, default=None, help="override dt")
    sub.add_argument("--tmax", type=float, default=None, help="override t_max")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crwsim",
        description="Controlled collective emission in a resonator waveguide")
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run one experiment")
    _add_common(run)
    run.set_defaults(func=cmd_run)

    sweep = subs.add_parser("sweep", help="run a family over one parameter")
    _add_common(sweep)
    sweep.add_argument("--axis", default=None,
                       help="system parameter to sweep")
    sweep.add_argument("--values", default=None,
                       help="comma-separated sweep values")
    sweep.set_defaults(func=cmd_sweep)

    fit = subs.add_parser("fit", help="power-law fit from a sweep table")
    fit.add_argument("--input", required=True, help="sweep CSV file")
    fit.add_argument("--x", default="N_T", help="abscissa column")
    fit.add_argument("--y", default="I", help="ordinate column")
    fit.add_argument("--out", default=None, help="JSON output path")
    fit.set_defaults(func=cmd_fit)

    pres = subs.add_parser("presets", help="list available presets")
    pres.set_defaults(func=cmd_presets)
    return parser


_ERROR_CLASSES = (ConfigError, PresetError, SpecError, EngineError, FitError,
                  minimal.MinimalModelError, exact.OracleError,
                  observables.ObservableError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ERROR_CLASSES as exc:
        code = getattr(exc, "code", exc.__class__.__name__)
        print(json.dumps({"error": code, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
