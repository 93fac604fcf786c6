"""Closed-loop scenario engine: config loading, the 250 Hz control loop over
the rigid-body model, CSV traces, and per-phase summaries."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import fastpath
from .actuation import InfeasibleAllocation, actuation_wrench, allocate
from .contact import WallModel, contact_wrench
from .control import CascadeController, ControlGains, Setpoint, WrenchObserver
from .dynamics import BodyState, IntegrationDiverged, from_euler
from .vehicle import (
    ConfigError,
    MassState,
    VehicleParams,
    check_plate_position,
    load_vehicle,
    params_from_dict,
    step_plate,
)

SCENARIO_DIR = Path(__file__).parent / "data" / "scenarios"
CONTROL_DT = 0.004

TRACE_COLUMNS = (
    "t", "phase", "x", "y", "z", "roll", "pitch", "yaw", "l", "d", "alpha",
    "T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8",
    "F1_cmd", "F3_cmd", "G1_cmd", "G2_cmd", "G3_cmd",
    "contact_force", "obs_Fx", "obs_Fy", "obs_Fz", "obs_Gx", "obs_Gy", "obs_Gz",
    "saturated", "back_saturated",
)


class ScenarioFailed(RuntimeError):
    def __init__(self, message: str, phase: str, result: "ScenarioResult"):
        super().__init__(message)
        self.phase = phase
        self.result = result


@dataclass(frozen=True)
class Event:
    t: float
    name: str
    mode: str | None = None
    delta_p: float | None = None
    position: tuple[float, float, float] | None = None
    pitch: float | None = None  # rad
    yaw: float | None = None  # rad
    l_cmd: float | None = None
    external_force: tuple[float, float, float] | None = None  # world frame, N


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    vehicle: VehicleParams
    events: tuple[Event, ...]
    duration: float
    dt: float = CONTROL_DT
    wall: WallModel | None = None
    gains: ControlGains = field(default_factory=ControlGains)
    initial_position: tuple[float, float, float] = (0.0, 0.0, 1.0)
    initial_yaw: float = 0.0
    initial_plate: float = 0.0
    initial_jitter: float = 0.0
    seed: int = 0
    observer_gain: float = 10.0
    steady_fraction: float = 0.2
    flip_angle: float = math.radians(60.0)
    output: str | None = None

    def validate(self) -> None:
        if not self.events:
            raise ConfigError("scenario needs at least one event")
        times = [e.t for e in self.events]
        if times[0] != 0.0:
            raise ConfigError("first event must start at t_s = 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("events must be strictly time-ordered")
        if times[-1] >= self.duration:
            raise ConfigError("last event starts after the scenario ends")
        if not 0 < self.dt <= CONTROL_DT:
            raise ConfigError(f"dt_s must lie in (0, {CONTROL_DT}]")
        n = CONTROL_DT / self.dt
        if abs(n - round(n)) > 1e-9:
            raise ConfigError(f"dt_s={self.dt} must divide the controller period {CONTROL_DT} s")
        if not 0 < self.steady_fraction <= 1:
            raise ConfigError("steady_fraction must lie in (0, 1]")
        check_plate_position(self.initial_plate, self.vehicle)
        for e in self.events:
            if e.mode not in (None, "navigation", "interaction"):
                raise ConfigError(f"event {e.name!r}: unknown mode {e.mode!r}")
            if e.l_cmd is not None:
                check_plate_position(e.l_cmd, self.vehicle)
            if e.delta_p is not None and self.wall is None:
                raise ConfigError(f"event {e.name!r} sets delta_p_m but the scenario has no wall")
        first = self.events[0]
        if first.mode is None:
            raise ConfigError("first event must set a mode")


# ---------------------------------------------------------------------------
# loading

_EVENT_KEYS = {"t_s", "name", "mode", "delta_p_m", "position_m", "pitch_deg", "yaw_deg", "l_cmd_m", "external_force_N"}


def _vec3(value, what):
    try:
        v = tuple(float(x) for x in value)
    except TypeError as exc:
        raise ConfigError(f"{what} must be a list of three numbers") from exc
    if len(v) != 3:
        raise ConfigError(f"{what} must be a list of three numbers")
    return v


def _event(raw: dict, index: int) -> Event:
    unknown = set(raw) - _EVENT_KEYS
    if unknown:
        raise ConfigError(f"event {index}: unknown keys {sorted(unknown)}")
    if "t_s" not in raw:
        raise ConfigError(f"event {index}: missing t_s")
    opt = lambda k: float(raw[k]) if raw.get(k) is not None else None  # noqa: E731
    return Event(
        t=float(raw["t_s"]),
        name=str(raw.get("name", f"phase{index}")),
        mode=raw.get("mode"),
        delta_p=opt("delta_p_m"),
        position=_vec3(raw["position_m"], "position_m") if "position_m" in raw else None,
        pitch=math.radians(raw["pitch_deg"]) if "pitch_deg" in raw else None,
        yaw=math.radians(raw["yaw_deg"]) if "yaw_deg" in raw else None,
        l_cmd=opt("l_cmd_m"),
        external_force=_vec3(raw["external_force_N"], "external_force_N") if "external_force_N" in raw else None,
    )


def _gains(raw: dict | None) -> ControlGains:
    if not raw:
        return ControlGains()
    kw = {}
    for key, value in raw.items():
        if key not in ("K", "D", "c2", "K_R", "K_w", "K_I", "integral_limit"):
            raise ConfigError(f"unknown gain {key!r}")
        kw[key] = float(value) if key in ("c2", "integral_limit") else np.asarray(value, dtype=float)
    try:
        return ControlGains(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _wall(raw: dict | None) -> WallModel | None:
    if raw is None:
        return None
    names = {
        "x_m": "x_wall", "normal": "normal", "k_n_N_per_m": "k_n", "c_n_Ns_per_m": "c_n",
        "mu": "mu", "v_reg_m_per_s": "v_reg",
    }
    unknown = set(raw) - set(names)
    if unknown:
        raise ConfigError(f"unknown wall keys {sorted(unknown)}")
    kw = {names[k]: (np.asarray(v, dtype=float) if k == "normal" else float(v)) for k, v in raw.items()}
    try:
        return WallModel(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_scenario_path(name_or_path: str | Path) -> Path:
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = SCENARIO_DIR / f"{name_or_path}.yaml"
    if bundled.exists():
        return bundled
    raise ConfigError(f"no scenario file or bundled scenario named {str(name_or_path)!r}")


def scenario_from_dict(raw: dict, base_dir: Path | None = None, vehicle: VehicleParams | None = None) -> ScenarioConfig:
    raw = dict(raw)
    known = {"name", "vehicle", "duration_s", "dt_s", "seed", "initial", "wall", "gains", "events",
             "observer_gain_per_s", "steady_fraction", "flip_deg", "output"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown scenario keys {sorted(unknown)}")
    if vehicle is None:
        ref = raw.get("vehicle", "default")
        try:
            if isinstance(ref, dict):
                vehicle = params_from_dict(ref)
            elif ref in (None, "default"):
                vehicle = load_vehicle()
            else:
                path = Path(ref)
                if not path.is_absolute() and base_dir is not None:
                    path = base_dir / path
                vehicle = load_vehicle(path)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    initial = raw.get("initial") or {}
    try:
        events = tuple(_event(e, i) for i, e in enumerate(raw["events"]))
        cfg = ScenarioConfig(
            name=str(raw.get("name", "scenario")),
            vehicle=vehicle,
            events=events,
            duration=float(raw["duration_s"]),
            dt=float(raw.get("dt_s", CONTROL_DT)),
            wall=_wall(raw.get("wall")),
            gains=_gains(raw.get("gains")),
            initial_position=_vec3(initial.get("position_m", (0.0, 0.0, 1.0)), "initial.position_m"),
            initial_yaw=math.radians(float(initial.get("yaw_deg", 0.0))),
            initial_plate=float(initial.get("plate_m", 0.0)),
            initial_jitter=float(initial.get("jitter_m", 0.0)),
            seed=int(raw.get("seed", 0)),
            observer_gain=float(raw.get("observer_gain_per_s", 10.0)),
            steady_fraction=float(raw.get("steady_fraction", 0.2)),
            flip_angle=math.radians(float(raw.get("flip_deg", 60.0))),
            output=raw.get("output"),
        )
    except KeyError as exc:
        raise ConfigError(f"missing scenario key {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def load_scenario(name_or_path, vehicle: VehicleParams | None = None) -> ScenarioConfig:
    path = resolve_scenario_path(name_or_path)
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"scenario {path} is not a mapping")
    return scenario_from_dict(raw, base_dir=path.parent, vehicle=vehicle)


# ---------------------------------------------------------------------------
# running


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trace: dict[str, np.ndarray]
    summary: dict
    failed: str | None = None


def _wall_setpoint(position, delta_p, wall: WallModel, params: VehicleParams) -> np.ndarray:
    """Body-origin target that puts the tip ``delta_p`` behind the wall surface."""
    n = wall.normal
    pos = np.asarray(position, dtype=float)
    on_plane = pos - n * (n @ (pos - wall.point))
    return on_plane + (params.tip_offset - delta_p) * n


class _Targets:
    def __init__(self, cfg: ScenarioConfig):
        self.mode = None
        self.delta_p = None
        self.position = np.array(cfg.initial_position, dtype=float)
        self.pitch = 0.0
        self.yaw = cfg.initial_yaw
        self.l_cmd = cfg.initial_plate
        self.external = np.zeros(3)

    def apply(self, e: Event):
        if e.mode is not None:
            self.mode = e.mode
        if e.delta_p is not None:
            self.delta_p = e.delta_p
        if e.position is not None:
            self.position = np.array(e.position, dtype=float)
        if e.pitch is not None:
            self.pitch = e.pitch
        if e.yaw is not None:
            self.yaw = e.yaw
        if e.l_cmd is not None:
            self.l_cmd = e.l_cmd
        if e.external_force is not None:
            self.external = np.array(e.external_force, dtype=float)

    def setpoint(self, cfg: ScenarioConfig) -> Setpoint:
        if self.delta_p is not None and cfg.wall is not None:
            p_des = _wall_setpoint(self.position, self.delta_p, cfg.wall, cfg.vehicle)
        else:
            p_des = self.position
        return Setpoint(
            p_des=p_des,
            psi_des=self.yaw,
            theta_des=self.pitch,
            mode=self.mode,
            delta_p=self.delta_p or 0.0,
        )


def run_scenario(cfg: ScenarioConfig, raise_on_failure: bool = True) -> ScenarioResult:
    cfg.validate()
    params = cfg.vehicle
    rng = np.random.default_rng(cfg.seed)
    p0 = np.array(cfg.initial_position, dtype=float)
    if cfg.initial_jitter > 0:
        p0 = p0 + rng.normal(0.0, cfg.initial_jitter, 3)
    state = BodyState.hover(p0, from_euler(0.0, 0.0, cfg.initial_yaw))
    l = cfg.initial_plate
    controller = CascadeController(params, cfg.gains)
    observer = WrenchObserver(params, cfg.observer_gain, cfg.observer_gain)
    targets = _Targets(cfg)
    substeps = int(round(CONTROL_DT / cfg.dt))
    n_ticks = int(round(cfg.duration / CONTROL_DT))
    events = list(cfg.events)
    next_event = 0
    phase = events[0].name
    wall = cfg.wall
    wall_arr = fastpath.wall_array(wall)
    rows = []
    failed = None

    for k in range(n_ticks):
        t = k * CONTROL_DT
        while next_event < len(events) and events[next_event].t <= t + 1e-9:
            targets.apply(events[next_event])
            phase = events[next_event].name
            next_event += 1
        l = step_plate(l, targets.l_cmd, CONTROL_DT, params)
        mass = MassState.at(l, params)
        setpoint = targets.setpoint(cfg)

        out = controller.update(state, setpoint, mass, CONTROL_DT)
        saturated = back_saturated = False
        try:
            cmd = allocate(out.wrench, params)
        except InfeasibleAllocation as exc:
            cmd = exc.command
            saturated, back_saturated = True, exc.back_saturated
        act = actuation_wrench(cmd, params)
        est = observer.update(state, mass, act, CONTROL_DT)

        if wall is not None:
            _, report = contact_wrench(state, wall, params)
            f_contact = report.normal_force
        else:
            f_contact = 0.0
        roll, pitch, yaw = state.euler()
        T = cmd.thrusts(params)
        sp = out.wrench
        rows.append((
            round(t, 6), phase, *state.p, roll, pitch, yaw, l, mass.d, cmd.alpha, *T,
            sp.F1, sp.F3, *sp.Gamma, f_contact, *est.F, *est.Gamma, int(saturated), int(back_saturated),
        ))
        if abs(pitch) > cfg.flip_angle or abs(roll) > cfg.flip_angle:
            failed = f"flip in phase {phase!r} at t={t:.3f} s"
            break

        try:
            state = fastpath.step(state, mass, act, wall, targets.external, cfg.dt, params, wall_arr, substeps)
        except IntegrationDiverged as exc:
            failed = f"integration diverged in phase {phase!r} at t={t:.3f} s"
            state = exc.last_state
            break

    trace = _columns(rows)
    result = ScenarioResult(cfg, trace, summarize(trace, cfg.steady_fraction, cfg.flip_angle), failed)
    if failed and raise_on_failure:
        raise ScenarioFailed(failed, phase, result)
    return result


def _columns(rows) -> dict[str, np.ndarray]:
    if not rows:
        return {c: np.array([]) for c in TRACE_COLUMNS}
    cols = list(zip(*rows))
    out = {}
    for name, values in zip(TRACE_COLUMNS, cols):
        if name == "phase":
            out[name] = np.array(values, dtype=object)
        elif name in ("saturated", "back_saturated"):
            out[name] = np.array(values, dtype=int)
        else:
            out[name] = np.array(values, dtype=float)
    return out


# ---------------------------------------------------------------------------
# summaries and trace files


def phase_slices(trace) -> list[tuple[str, slice]]:
    phases = trace["phase"]
    out = []
    start = 0
    for i in range(1, len(phases) + 1):
        if i == len(phases) or phases[i] != phases[start]:
            out.append((str(phases[start]), slice(start, i)))
            start = i
    return out


def summarize(trace, steady_fraction: float = 0.2, flip_angle: float = math.radians(60.0)) -> dict:
    """Per-phase and overall figures computed from trace columns only."""
    phases = []
    for name, sl in phase_slices(trace):
        n = sl.stop - sl.start
        w0 = sl.stop - max(1, int(math.ceil(steady_fraction * n)))
        steady = slice(w0, sl.stop)
        pitch = trace["pitch"][sl]
        back = trace["T3"][steady] + trace["T4"][steady] + trace["T5"][steady] + trace["T8"][steady]
        phases.append({
            "phase": name,
            "t_start": float(trace["t"][sl.start]),
            "t_end": float(trace["t"][sl.stop - 1]),
            "steady_contact_force": float(np.mean(trace["contact_force"][steady])),
            "min_contact_force": float(np.min(trace["contact_force"][sl])),
            "steady_observer_force": float(np.mean(np.hypot(trace["obs_Fx"][steady], trace["obs_Fz"][steady]))),
            "steady_alpha": float(np.mean(trace["alpha"][steady])),
            "steady_back_thrust": float(np.mean(back)),
            "max_abs_pitch": float(np.max(np.abs(pitch))),
            "pitch_p2p": float(np.ptp(pitch)),
            "steady_pitch_p2p": float(np.ptp(trace["pitch"][steady])),
            "saturation_fraction": float(np.mean(trace["saturated"][sl])),
            "back_saturation_fraction": float(np.mean(trace["back_saturated"][sl])),
            "final_plate": float(trace["l"][sl.stop - 1]),
        })
    n = len(trace["t"])
    max_pitch = float(np.max(np.abs(trace["pitch"]))) if n else 0.0
    max_roll = float(np.max(np.abs(trace["roll"]))) if n else 0.0
    return {
        "rows": n,
        "phases": phases,
        "max_abs_pitch": max_pitch,
        "saturation_fraction": float(np.mean(trace["saturated"])) if n else 0.0,
        "flipped": bool(max(max_pitch, max_roll) > flip_angle),
    }


def _fmt(name, value) -> str:
    if name == "t":
        return f"{value:.6f}"
    if name == "phase":
        return str(value)
    if name in ("saturated", "back_saturated"):
        return str(int(value))
    return repr(float(value))


def write_trace(trace, path) -> None:
    n = len(trace["t"])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for i in range(n):
            w.writerow([_fmt(c, trace[c][i]) for c in TRACE_COLUMNS])


def read_trace(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ConfigError(f"{path}: unexpected trace header")
        rows = [tuple(r) for r in reader]
    parsed = []
    for r in rows:
        parsed.append(tuple(
            v if c == "phase" else (int(v) if c in ("saturated", "back_saturated") else float(v))
            for c, v in zip(TRACE_COLUMNS, r)
        ))
    return _columns(parsed)


def audit_trace(trace, params: VehicleParams, tol: float = 1e-9) -> list[str]:
    """Rows violating the plate, CoM, tilt or rotor-speed invariants."""
    problems = []
    lo, hi = params.alpha_range
    ratio = params.m_S / params.m
    T_max = params.thrust_max
    thrusts = np.column_stack([trace[f"T{i}"] for i in range(1, 9)]) if len(trace["t"]) else np.zeros((0, 8))
    for i in range(len(trace["t"])):
        l, d, a = trace["l"][i], trace["d"][i], trace["alpha"][i]
        t = trace["t"][i]
        if l < -tol or l > params.l_max + tol:
            problems.append(f"t={t:.6f}: plate position {l} out of range")
        if abs(d - ratio * l) > tol or d < -tol or d > params.L + tol:
            problems.append(f"t={t:.6f}: CoM offset {d} inconsistent")
        if not lo - tol <= a <= hi + tol:
            problems.append(f"t={t:.6f}: tilt {a} out of range")
        if np.any(thrusts[i] < -tol) or np.any(thrusts[i] > T_max * (1 + tol)):
            problems.append(f"t={t:.6f}: rotor thrust out of range")
    return problems


def with_dt(cfg: ScenarioConfig, dt: float) -> ScenarioConfig:
    return replace(cfg, dt=dt)
