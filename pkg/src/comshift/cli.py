"""Command-line front end.

Exit codes: 0 success, 1 infeasible demand or failed scenario, 2 bad config.
Errors are reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from .analysis import (
    TrimInfeasible,
    hf_factor,
    load_records,
    sweep_rl,
    trim_solve,
    write_hf_csv,
    write_sweep_csv,
)
from .scenario import ScenarioFailed, load_scenario, run_scenario, scenario_from_dict, with_dt, write_trace
from .vehicle import ConfigError, LimitViolation, MassState, load_vehicle, params_from_dict

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


class _Fail(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra):
        super().__init__(message)
        self.code, self.kind, self.extra = code, kind, extra


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=default(None), help="vehicle config YAML (defaults to the bundled demo vehicle)")
    p.add_argument("--out", default=default("out"), help="output directory (default: out)")
    p.add_argument("--seed", type=int, default=default(None), help="override the scenario seed")
    p.add_argument("--dt", type=float, default=default(None), help="physics step in s (must divide 0.004)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="comshift", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run a scenario, write trace CSV and summary JSON")
    p.add_argument("scenario", help="scenario YAML path or bundled name (scenario1, scenario2, freeflight)")

    p = sub.add_parser("sweep-com", parents=[common], help="contact force versus CoM ratio r_l")
    p.add_argument("--g0", type=float, default=30.0, help="weight G0 in N")
    p.add_argument("--t2", type=float, default=20.0, help="back-rotor thrust T2 in N")
    p.add_argument("--span", type=float, default=0.27, help="front-to-back rotor distance in m")
    p.add_argument("--points", type=int, default=101)

    p = sub.add_parser("compare-hf", parents=[common], help="force-exertion factor h_f per platform")
    p.add_argument("--records", default=None, help="platform CSV (defaults to the bundled table)")

    p = sub.add_parser("trim", parents=[common], help="wall-pressed trim at CoM offset d")
    p.add_argument("--d", type=float, required=True, help="CoM offset in m")
    p.add_argument("--fc", type=float, required=True, help="target contact force in N")

    p = sub.add_parser("validate", parents=[common], help="check a vehicle or scenario config")
    p.add_argument("target", help="YAML file (a scenario if it has an events key)")
    return parser


def _vehicle(args):
    return load_vehicle(args.config) if args.config else None


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = load_scenario(args.scenario, vehicle=_vehicle(args))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.dt is not None:
        cfg = with_dt(cfg, args.dt)
        cfg.validate()
    out = _out_dir(args)
    try:
        result = run_scenario(cfg, raise_on_failure=True)
    except ScenarioFailed as exc:
        result = exc.result
    trace_path = out / f"{cfg.name}_trace.csv"
    summary_path = out / f"{cfg.name}_summary.json"
    write_trace(result.trace, trace_path)
    summary = dict(result.summary, scenario=cfg.name, failed=result.failed)
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    for ph in summary["phases"]:
        print(f"{ph['phase']:>14s}  f_c={ph['steady_contact_force']:7.3f} N  alpha={math.degrees(ph['steady_alpha']):6.2f} deg"
              f"  |pitch|max={math.degrees(ph['max_abs_pitch']):6.2f} deg  sat={ph['saturation_fraction']:.3f}")
    print(f"trace: {trace_path}\nsummary: {summary_path}")
    if result.failed:
        raise _Fail(EXIT_FAILED, "ScenarioFailed", result.failed, trace=str(trace_path))
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows = sweep_rl(args.g0, args.t2, args.span, args.points)
    path = _out_dir(args) / "force_com.csv"
    write_sweep_csv(rows, path)
    print(f"{len(rows)} rows -> {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        records = load_records(args.records)
    except (OSError, KeyError) as exc:
        raise ConfigError(f"cannot read platform records: {exc}") from exc
    path = _out_dir(args) / "hf_comparison.csv"
    write_hf_csv(records, path)
    for r in records:
        print(f"{r.name:>8s}  h_f={hf_factor(r):.2f}")
    print(f"-> {path}")
    return EXIT_OK


def cmd_trim(args) -> int:
    params = _vehicle(args) or load_vehicle()
    if not 0.0 <= args.d <= params.L:
        raise LimitViolation(f"CoM offset d={args.d} m outside [0, L={params.L}]", bound="0 <= d <= L")
    mass = MassState.at(args.d * params.m / params.m_S, params)
    try:
        res = trim_solve(mass, args.fc, params)
    except TrimInfeasible as exc:
        raise _Fail(EXIT_FAILED, "TrimInfeasible", str(exc), binding=exc.binding) from exc
    print(json.dumps({
        "d_m": args.d,
        "contact_force_N": res.contact_force,
        "alpha_deg": math.degrees(res.alpha),
        "T_front_N": res.T_front,
        "T_back_N": res.T_back,
        "thrusts_N": [round(float(t), 9) for t in res.thrusts],
        "residual": res.residual,
    }))
    return EXIT_OK


def cmd_validate(args) -> int:
    path = Path(args.target)
    try:
        raw = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} is not a mapping")
    if "events" in raw:
        cfg = scenario_from_dict(raw, base_dir=path.parent, vehicle=_vehicle(args))
        print(f"ok: scenario {cfg.name!r}, {len(cfg.events)} events, {cfg.duration:g} s")
    else:
        params = params_from_dict(raw.get("vehicle", raw))
        print(f"ok: vehicle m={params.m} kg, l_max={params.l_max:.4g} m")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep-com": cmd_sweep,
    "compare-hf": cmd_compare,
    "trim": cmd_trim,
    "validate": cmd_validate,
}


def _report(code: int, kind: str, message: str, **extra) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code, **extra}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _Fail as exc:
        return _report(exc.code, exc.kind, str(exc), **exc.extra)
    except LimitViolation as exc:
        return _report(EXIT_CONFIG, "LimitViolation", str(exc), bound=exc.bound)
    except ConfigError as exc:
        return _report(EXIT_CONFIG, "ConfigError", str(exc))
    except ValueError as exc:
        return _report(EXIT_CONFIG, "ValueError", str(exc))


if __name__ == "__main__":
    sys.exit(main())
