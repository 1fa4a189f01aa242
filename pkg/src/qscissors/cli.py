"""Command-line front end: config parsing, scenario presets, CSV emission.

Configuration is a flat ``key = value`` text format, one pair per line, with
``#`` starting a comment. Unknown keys are hard errors. Precedence, lowest to
highest: built-in defaults, --preset overlay, --config file, --set pairs,
dedicated flags (--out, --workers, --threshold, --renormalize-trunc,
--thermal-only).

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.
"""

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .fock import ModeDims
from .model import SystemParams
from .dynamics import IntegrationError, IntegratorOptions
from .entanglement import TRUNC_BASIS
from .analysis import (
    cutoff_convergence,
    detect_death_time,
    run_decay,
    run_fidelity,
    sweep_phase,
    sweep_squeezing,
)

SCENARIOS = ("simulate", "sweep-phase", "sweep-na", "fidelity", "convergence")
INITIAL_STATES = ("B1", "B2", "B3", "vacuum")
ERROR_CONTROLS = ("fixed", "step_doubling")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    chi_a: float = 25.0
    chi_b: float = 25.0
    epsilon: complex = 0.1
    alpha: complex = 0.1
    gamma_a: float = 0.0025
    gamma_b: float = 0.0025
    N_a: float = 2.0
    N_b: float = 0.0
    phi: float = 0.0
    levels_a: int = 10
    levels_b: int = 10
    t_max_chi: float = 2000.0
    sample_chi: float = 0.2
    step_abs: float | None = None
    error_control: str = "fixed"
    local_tolerance: float = 1e-9
    initial_state: str = "B3"
    scenario: str = "simulate"
    output_dir: str = "out"
    death_threshold: float = 1e-4
    renormalize_trunc: bool = False
    thermal_only: bool = False
    populations: bool = False
    phi_points: int = 16
    na_grid: tuple = (0.0, 0.5, 1.0, 2.0, 4.0)
    workers: int | None = None


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_complex(raw: str) -> complex:
    value = complex(raw.replace(" ", ""))
    return value.real if value.imag == 0.0 else value


def _parse_grid(raw: str) -> tuple:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty value grid")
    return tuple(float(p) for p in parts)


def _parse_optional_float(raw: str):
    return None if raw.strip() == "" else float(raw)


def _parse_optional_int(raw: str):
    return None if raw.strip() == "" else int(raw)


def _parse_choice(options):
    def parse(raw: str) -> str:
        if raw not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return raw

    return parse


# key -> value parser; every key doubles as a RunConfig field name
KEY_PARSERS = {
    "chi_a": float,
    "chi_b": float,
    "epsilon": _parse_complex,
    "alpha": _parse_complex,
    "gamma_a": float,
    "gamma_b": float,
    "N_a": float,
    "N_b": float,
    "phi": float,
    "levels_a": int,
    "levels_b": int,
    "t_max_chi": float,
    "sample_chi": float,
    "step_abs": _parse_optional_float,
    "error_control": _parse_choice(ERROR_CONTROLS),
    "local_tolerance": float,
    "initial_state": _parse_choice(INITIAL_STATES),
    "scenario": _parse_choice(SCENARIOS),
    "output_dir": str,
    "death_threshold": float,
    "renormalize_trunc": _parse_bool,
    "thermal_only": _parse_bool,
    "populations": _parse_bool,
    "phi_points": int,
    "na_grid": _parse_grid,
    "workers": _parse_optional_int,
}

# Scenario bundles; values are config-format strings overlaid on the defaults.
PRESETS = {
    "fig1": {
        "scenario": "fidelity",
        "gamma_a": "0.0",
        "gamma_b": "0.0",
        "initial_state": "vacuum",
        "t_max_chi": "1000",
    },
    "fig2": {
        "scenario": "sweep-na",
        "alpha": "0.01",
        "phi": "0.0",
        "t_max_chi": "4000",
    },
    "fig3": {
        "scenario": "simulate",
        "epsilon": "0.0",
        "alpha": "0.01",
        "t_max_chi": "1500",
    },
    "fig4a": {
        "scenario": "sweep-phase",
        "alpha": "0.01",
        "t_max_chi": "2000",
    },
    "fig4b": {
        "scenario": "sweep-phase",
        "alpha": "0.1",
        "t_max_chi": "2000",
    },
    "fig4c": {
        "scenario": "sweep-phase",
        "alpha": "0.2",
        "t_max_chi": "2000",
    },
    "fig6": {
        "scenario": "sweep-phase",
        "N_a": "1.0",
        "alpha": "0.2",
        "t_max_chi": "3000",
    },
    "fig7": {
        "scenario": "simulate",
        "t_max_chi": "2000",
    },
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat key = value text into raw string pairs, with line numbers."""
    raw = {}
    seen_lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KEY_PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(
                f"{source}:{lineno}: duplicate key {key!r} (first set on line {seen_lines[key]})"
            )
        raw[key] = value
        seen_lines[key] = lineno
    return raw


def _apply(cfg_values: dict, raw: dict, source: str):
    for key, value in raw.items():
        parser = KEY_PARSERS[key]
        try:
            cfg_values[key] = parser(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}: key {key!r}: {exc}") from None


def build_config(preset: str | None = None, config_text: str | None = None,
                 set_pairs=(), flag_overrides: dict | None = None) -> RunConfig:
    values = {f.name: getattr(RunConfig(), f.name) for f in fields(RunConfig)}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}")
        _apply(values, PRESETS[preset], f"preset {preset}")
    if config_text is not None:
        _apply(values, parse_config_text(config_text, "config"), "config")
    for i, pair in enumerate(set_pairs, start=1):
        if "=" not in pair:
            raise ConfigError(f"--set #{i}: expected key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KEY_PARSERS:
            raise ConfigError(f"--set #{i}: unknown key {key!r}")
        _apply(values, {key: value}, f"--set #{i}")
    for key, value in (flag_overrides or {}).items():
        if value is not None:
            values[key] = value
    cfg = RunConfig(**values)
    validate_config(cfg)
    return cfg


def system_params(cfg: RunConfig) -> SystemParams:
    return SystemParams(chi_a=cfg.chi_a, chi_b=cfg.chi_b, epsilon=cfg.epsilon,
                        alpha=cfg.alpha, gamma_a=cfg.gamma_a, gamma_b=cfg.gamma_b,
                        N_a=cfg.N_a, N_b=cfg.N_b, phi=cfg.phi)


def mode_dims(cfg: RunConfig) -> ModeDims:
    return ModeDims(cfg.levels_a, cfg.levels_b)


def integrator_options(cfg: RunConfig) -> IntegratorOptions:
    return IntegratorOptions(t_max=cfg.t_max_chi / cfg.chi_a,
                             sample_interval=cfg.sample_chi / cfg.chi_a,
                             step=cfg.step_abs,
                             error_control=cfg.error_control,
                             local_tolerance=cfg.local_tolerance)


def validate_config(cfg: RunConfig):
    try:
        system_params(cfg)
        mode_dims(cfg)
        integrator_options(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.death_threshold <= 0:
        raise ConfigError("death_threshold must be positive")
    if cfg.phi_points < 1:
        raise ConfigError("phi_points must be at least 1")
    if any(v < 0 for v in cfg.na_grid):
        raise ConfigError("na_grid values must be nonnegative")
    if cfg.workers is not None and cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    if cfg.scenario == "fidelity" and (cfg.gamma_a != 0.0 or cfg.gamma_b != 0.0):
        raise ConfigError("scenario fidelity requires gamma_a = gamma_b = 0")


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, complex):
        return repr(value).replace(" ", "")
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def manifest_text(cfg: RunConfig, diagnostics: dict) -> str:
    lines = [f"# run manifest (version {__version__})"]
    for key, value in diagnostics.items():
        lines.append(f"# {key}: {value}")
    lines.append("# parameter lines below round-trip as a --config file")
    for f in fields(RunConfig):
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.12f}"


def write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _series_rows(series):
    for i in range(len(series)):
        row = [_fmt(series.times_chi[i]), _fmt(series.negativity[i]),
               _fmt(series.trunc_trace[i])]
        if series.populations is not None:
            row.extend(_fmt(p) for p in series.populations[i])
        yield row


def _sweep_rows(table):
    for row in table.rows:
        if row.report is None:
            yield [_fmt(row.axis_value), "", "", "", "", row.status]
            continue
        rep = row.report
        tau = "" if rep.tau_d_chi is None else _fmt(rep.tau_d_chi)
        yield [_fmt(row.axis_value), tau, str(rep.n_rebirths),
               _fmt(rep.max_last), _fmt(rep.max_penultimate), row.status]


def _run_simulate(cfg: RunConfig, out_dir: str) -> tuple[dict, int]:
    series, record = run_decay(system_params(cfg), mode_dims(cfg), integrator_options(cfg),
                               initial=cfg.initial_state, thermal_only=cfg.thermal_only,
                               renormalize=cfg.renormalize_trunc,
                               populations=cfg.populations)
    header = "t_chi,negativity,trunc_trace"
    if cfg.populations:
        header += "," + ",".join(f"pop_{n}_{m}" for n, m in TRUNC_BASIS)
    write_csv(os.path.join(out_dir, "series.csv"), header, _series_rows(series))
    report = detect_death_time(series, cfg.death_threshold)
    tau = "undetermined" if report.tau_d_chi is None else _fmt(report.tau_d_chi)
    diag = {
        "max_trace_drift": repr(float(record.trace_drift.max())),
        "max_hermiticity_drift": repr(float(record.hermiticity_drift.max())),
        "resolved_step_abs": repr(float(record.step)),
        "total_steps": record.total_steps,
        "tau_d_chi": tau,
        "n_rebirths": report.n_rebirths,
        "max_last": repr(report.max_last),
        "max_penultimate": repr(report.max_penultimate),
    }
    print(f"simulate: {len(series)} samples, tau_d_chi = {tau}, "
          f"rebirths = {report.n_rebirths}")
    return diag, 0


def _run_fidelity(cfg: RunConfig, out_dir: str) -> tuple[dict, int]:
    times_chi, fid, record = run_fidelity(system_params(cfg), mode_dims(cfg),
                                          integrator_options(cfg), initial=cfg.initial_state)
    rows = ([_fmt(t), _fmt(f), _fmt(d)]
            for t, f, d in zip(times_chi, fid, record.norm_drift))
    write_csv(os.path.join(out_dir, "series.csv"), "t_chi,fidelity,norm_drift", rows)
    diag = {
        "max_norm_drift": repr(float(record.norm_drift.max())),
        "resolved_step_abs": repr(float(record.step)),
        "total_steps": record.total_steps,
        "min_fidelity": repr(float(fid.min())),
    }
    print(f"fidelity: {len(fid)} samples, min fidelity = {fid.min():.6f}")
    return diag, 0


def _run_sweep(cfg: RunConfig, out_dir: str) -> tuple[dict, int]:
    params = system_params(cfg)
    dims = mode_dims(cfg)
    opts = integrator_options(cfg)
    if cfg.scenario == "sweep-phase":
        grid = [2.0 * math.pi * k / cfg.phi_points for k in range(cfg.phi_points)]
        table = sweep_phase(params, grid, dims, opts, threshold=cfg.death_threshold,
                            renormalize=cfg.renormalize_trunc, thermal_only=cfg.thermal_only,
                            workers=cfg.workers)
    else:
        table = sweep_squeezing(params, list(cfg.na_grid), dims, opts,
                                threshold=cfg.death_threshold,
                                renormalize=cfg.renormalize_trunc,
                                thermal_only=cfg.thermal_only, workers=cfg.workers)
    write_csv(os.path.join(out_dir, "sweep.csv"),
              "axis_value,tau_d_chi,n_rebirths,max_last,max_penultimate,status",
              _sweep_rows(table))
    failed = sum(1 for row in table.rows if row.status == "error")
    drifts = [row.max_trace_drift for row in table.rows if not math.isnan(row.max_trace_drift)]
    diag = {
        "axis": table.axis_name,
        "rows": len(table.rows),
        "rows_failed": failed,
        "max_trace_drift": repr(max(drifts)) if drifts else "nan",
    }
    print(f"{cfg.scenario}: {len(table.rows)} rows, {failed} failed")
    if failed:
        print(f"{failed} sweep rows failed; see sweep.csv status column", file=sys.stderr)
        return diag, 3
    return diag, 0


def _run_convergence(cfg: RunConfig, out_dir: str) -> tuple[dict, int]:
    report = cutoff_convergence(system_params(cfg), mode_dims(cfg), integrator_options(cfg),
                                initial=cfg.initial_state, thermal_only=cfg.thermal_only,
                                renormalize=cfg.renormalize_trunc)
    base, refined = report.series_base, report.series_refined
    rows = ([_fmt(t), _fmt(nb), _fmt(nr), _fmt(abs(nb - nr))]
            for t, nb, nr in zip(base.times_chi, base.negativity, refined.negativity))
    write_csv(os.path.join(out_dir, "convergence.csv"),
              "t_chi,negativity_base,negativity_refined,abs_diff", rows)
    diag = {
        "base_levels": f"{report.base_dims.levels_a}x{report.base_dims.levels_b}",
        "refined_levels": f"{report.refined_dims.levels_a}x{report.refined_dims.levels_b}",
        "sup_diff": repr(report.sup_diff),
        "tolerance": repr(report.tolerance),
        "converged": "yes" if report.passed else "no",
        "converged_cutoff": (f"{report.base_dims.levels_a}x{report.base_dims.levels_b}"
                             if report.passed else "raise levels and re-run"),
    }
    print(f"convergence: sup|diff| = {report.sup_diff:.3e} "
          f"({'PASS' if report.passed else 'FAIL'} at {report.tolerance:g})")
    return diag, 0


def run(cfg: RunConfig) -> int:
    out_dir = cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    started = time.perf_counter()
    if cfg.scenario == "simulate":
        diag, code = _run_simulate(cfg, out_dir)
    elif cfg.scenario == "fidelity":
        diag, code = _run_fidelity(cfg, out_dir)
    elif cfg.scenario in ("sweep-phase", "sweep-na"):
        diag, code = _run_sweep(cfg, out_dir)
    else:
        diag, code = _run_convergence(cfg, out_dir)
    diag["scenario"] = cfg.scenario
    diag["wall_seconds"] = f"{time.perf_counter() - started:.3f}"
    with open(os.path.join(out_dir, "manifest.txt"), "w", newline="") as fh:
        fh.write(manifest_text(cfg, diag))
    print(f"wrote {out_dir}/manifest.txt")
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qscissors",
        description="Entanglement decay of two coupled Kerr oscillators "
                    "in a squeezed vacuum reservoir.")
    parser.add_argument("--config", help="path to a flat key = value config file")
    parser.add_argument("--preset", help="named scenario bundle: " + ", ".join(sorted(PRESETS)))
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("--workers", type=int, help="sweep worker processes")
    parser.add_argument("--set", dest="set_pairs", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config key (repeatable)")
    parser.add_argument("--threshold", type=float, help="death detection threshold")
    parser.add_argument("--renormalize-trunc", action="store_true", default=None,
                        help="renormalize the truncated state before negativity")
    parser.add_argument("--thermal-only", action="store_true", default=None,
                        help="force M = 0 (thermal bath) while keeping N")
    args = parser.parse_args(argv)

    try:
        config_text = None
        if args.config is not None:
            try:
                with open(args.config) as fh:
                    config_text = fh.read()
            except OSError as exc:
                print(f"cannot read config: {exc}", file=sys.stderr)
                return 4
        cfg = build_config(
            preset=args.preset,
            config_text=config_text,
            set_pairs=args.set_pairs,
            flag_overrides={
                "output_dir": args.out,
                "workers": args.workers,
                "death_threshold": args.threshold,
                "renormalize_trunc": args.renormalize_trunc,
                "thermal_only": args.thermal_only,
            },
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        return run(cfg)
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
