"""Platform constants and the mass-geometry state of the shifting-plate vehicle."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

DEFAULT_VEHICLE = Path(__file__).parent / "data" / "vehicle_default.yaml"


class LimitViolation(ValueError):
    """A quantity left its admissible range. ``bound`` names the violated limit."""

    def __init__(self, message: str, bound: str):
        super().__init__(message)
        self.bound = bound


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InertiaCoeffs:
    # I_yy(l) = a_yy l^2 + b_yy, I_zz(l) = a_zz l^2 + b_zz, I_xx fixed
    I_xx: float = 0.0444
    a_yy: float = 0.49
    b_yy: float = 0.0538
    a_zz: float = 0.52
    b_zz: float = 0.0795


@dataclass(frozen=True)
class VehicleParams:
    m: float = 3.12
    m_S: float = 3.12 * 0.135 / 0.48
    L: float = 0.135
    W: float = 0.135
    L0: float = 0.40
    l_S: float = 0.10
    k_t: float = 1.0e-5
    k_b: float = 1.6e-7
    omega_max: float = 877.5
    alpha_range: tuple[float, float] = (-np.pi / 2, np.pi / 2)
    v_plate: float = 0.001
    inertia_coeffs: InertiaCoeffs = field(default_factory=InertiaCoeffs)
    g_mag: float = 9.81
    # drag-torque sign per rotor 1..8 along its thrust axis
    drag_sign: tuple[int, ...] = (-1, 1, -1, 1, -1, 1, -1, 1)

    def __post_init__(self):
        if not (self.m > self.m_S > 0):
            raise ConfigError(f"need m > m_S > 0, got m={self.m}, m_S={self.m_S}")
        for name in ("L", "W", "L0", "l_S", "k_t", "k_b", "omega_max", "v_plate", "g_mag"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        lo, hi = self.alpha_range
        if not (-np.pi / 2 - 1e-12 <= lo <= hi <= np.pi / 2 + 1e-12):
            raise ConfigError(f"alpha_range {self.alpha_range} must lie inside [-90 deg, 90 deg]")
        if len(self.drag_sign) != 8 or any(s not in (-1, 1) for s in self.drag_sign):
            raise ConfigError("drag_sign needs eight entries of +1/-1")

    @property
    def weight(self) -> float:
        return self.m * self.g_mag

    @property
    def thrust_max(self) -> float:
        """Per-rotor thrust at ``omega_max``."""
        return self.k_t * self.omega_max**2

    @property
    def l_max_com(self) -> float:
        """Plate position that puts the CoM on the front rotor line (d = L)."""
        return self.m / self.m_S * self.L

    @property
    def l_max_travel(self) -> float:
        return self.L + self.L0 - 0.5 * self.l_S

    @property
    def l_max(self) -> float:
        return min(self.l_max_com, self.l_max_travel)

    @property
    def tip_offset(self) -> float:
        """Body-x coordinate of the alignment-frame tip."""
        return self.L + self.L0


@dataclass(frozen=True)
class MassState:
    l: float
    d: float
    I: np.ndarray

    @classmethod
    def at(cls, l: float, params: VehicleParams) -> "MassState":
        return cls(l=l, d=com_displacement(l, params), I=inertia_matrix(l, params))


def check_plate_position(l: float, params: VehicleParams, tol: float = 1e-12) -> None:
    if l < -tol:
        raise LimitViolation(f"plate position l={l:.6g} m below 0", bound="l >= 0")
    if l > params.l_max_com + tol:
        raise LimitViolation(
            f"plate position l={l:.6g} m exceeds (m/m_S)*L={params.l_max_com:.6g} m",
            bound="l <= (m/m_S)*L",
        )
    if l > params.l_max_travel + tol:
        raise LimitViolation(
            f"plate position l={l:.6g} m exceeds L+L0-0.5*l_S={params.l_max_travel:.6g} m",
            bound="l <= L+L0-0.5*l_S",
        )


def com_displacement(l: float, params: VehicleParams) -> float:
    check_plate_position(l, params)
    return params.m_S / params.m * l


def inertia_matrix(l: float, params: VehicleParams) -> np.ndarray:
    c = params.inertia_coeffs
    l2 = l * l
    return np.diag([c.I_xx, c.a_yy * l2 + c.b_yy, c.a_zz * l2 + c.b_zz])


def step_plate(l_current: float, l_command: float, dt: float, params: VehicleParams) -> float:
    """Move the plate toward ``l_command`` by at most ``v_plate * dt``."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    check_plate_position(l_command, params)
    step = params.v_plate * dt
    delta = l_command - l_current
    if abs(delta) <= step:
        return l_command
    return l_current + np.copysign(step, delta)


# ---------------------------------------------------------------------------
# config file

_KEYS = {
    "mass_kg": "m",
    "plate_mass_kg": "m_S",
    "arm_x_m": "L",
    "arm_y_m": "W",
    "alignment_frame_m": "L0",
    "plate_length_m": "l_S",
    "thrust_coeff_N_s2": "k_t",
    "drag_coeff_Nm_s2": "k_b",
    "omega_max_rad_s": "omega_max",
    "plate_speed_m_s": "v_plate",
    "gravity_m_s2": "g_mag",
}
_INERTIA_KEYS = {
    "Ixx_kg_m2": "I_xx",
    "a_yy_kg": "a_yy",
    "b_yy_kg_m2": "b_yy",
    "a_zz_kg": "a_zz",
    "b_zz_kg_m2": "b_zz",
}


def params_from_dict(raw: dict) -> VehicleParams:
    raw = dict(raw or {})
    kw = {}
    for key, attr in _KEYS.items():
        if key in raw:
            kw[attr] = float(raw.pop(key))
    if "com_limit_m" in raw:
        # plate position that reaches d = L; fixes m_S when no plate mass is given
        limit = float(raw.pop("com_limit_m"))
        kw.setdefault("m_S", kw.get("m", VehicleParams.m) * kw.get("L", VehicleParams.L) / limit)
    if "alpha_range_deg" in raw:
        lo, hi = raw.pop("alpha_range_deg")
        kw["alpha_range"] = (np.radians(float(lo)), np.radians(float(hi)))
    if "drag_sign" in raw:
        kw["drag_sign"] = tuple(int(s) for s in raw.pop("drag_sign"))
    if "inertia" in raw:
        inertia = dict(raw.pop("inertia"))
        ikw = {}
        for key, attr in _INERTIA_KEYS.items():
            if key in inertia:
                ikw[attr] = float(inertia.pop(key))
        if inertia:
            raise ConfigError(f"unknown inertia keys: {sorted(inertia)}")
        kw["inertia_coeffs"] = InertiaCoeffs(**ikw)
    raw.pop("note", None)
    if raw:
        raise ConfigError(f"unknown vehicle keys: {sorted(raw)}")
    return VehicleParams(**kw)


def load_vehicle(path: str | Path | None = None) -> VehicleParams:
    path = Path(path) if path is not None else DEFAULT_VEHICLE
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read vehicle config {path}: {exc}") from exc
    if isinstance(raw, dict) and "vehicle" in raw:
        raw = raw["vehicle"]
    if not isinstance(raw, dict):
        raise ConfigError(f"vehicle config {path} is not a mapping")
    return params_from_dict(raw)


def with_overrides(params: VehicleParams, **changes) -> VehicleParams:
    return replace(params, **changes)
