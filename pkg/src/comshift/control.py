"""Cascade controller: impedance position loop, geometric attitude loop with
integral action, navigation/interaction mode logic, and a momentum-based
external wrench observer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from .actuation import ActuatorCommand, Wrench, WrenchSetpoint5, actuation_wrench
from .dynamics import BodyState, E3, cross, gravity_wrench, rot_x, rot_y, rot_z, vee
from .vehicle import MassState, VehicleParams

Mode = Literal["navigation", "interaction"]


class DegenerateDirection(ValueError):
    pass


def _diag(values) -> np.ndarray:
    return np.asarray(values, dtype=float)


@dataclass(frozen=True)
class ControlGains:
    """Diagonal gains stored as 3-vectors."""

    K: np.ndarray = field(default_factory=lambda: _diag([22.0, 22.0, 80.0]))
    D: np.ndarray = field(default_factory=lambda: _diag([10.0, 10.0, 45.0]))
    c2: float = 0.8
    K_R: np.ndarray = field(default_factory=lambda: _diag([5.0, 5.0, 3.0]))
    K_w: np.ndarray = field(default_factory=lambda: _diag([1.0, 1.4, 0.25]))
    K_I: np.ndarray = field(default_factory=lambda: _diag([0.0, 3.25, 0.5]))
    integral_limit: float = 1.0

    def __post_init__(self):
        for name in ("K", "D", "K_R", "K_w", "K_I"):
            arr = _diag(getattr(self, name))
            if arr.shape != (3,) or np.any(arr < 0):
                raise ValueError(f"gain {name} must be three non-negative diagonal entries")
            object.__setattr__(self, name, arr)
        if self.c2 < 0 or self.integral_limit < 0:
            raise ValueError("c2 and integral_limit must be non-negative")


@dataclass(frozen=True)
class Setpoint:
    p_des: np.ndarray
    v_des: np.ndarray = field(default_factory=lambda: np.zeros(3))
    psi_des: float = 0.0
    theta_des: float = 0.0
    mode: Mode = "navigation"
    delta_p: float = 0.0


def impedance_force(
    state: BodyState,
    setpoint: Setpoint,
    gains: ControlGains,
    params: VehicleParams,
    damping_scale: float = 1.0,
) -> np.ndarray:
    """World-frame force demand of the spring-damper position loop with weight feedforward."""
    e_p = setpoint.p_des - state.p
    e_v = setpoint.v_des - state.R @ state.v
    return gains.K * e_p + damping_scale * gains.D * e_v + params.weight * E3


def desired_attitude(
    f_des: np.ndarray,
    setpoint: Setpoint,
    R: np.ndarray,
    f_tilt: np.ndarray | None = None,
) -> tuple[np.ndarray, float, float]:
    """Desired orientation plus the body-x and body-z force demands (F1, F3).

    ``f_tilt`` is the force used to shape the attitude (defaults to
    ``f_des``); the controller passes one with a reduced velocity term.
    In navigation mode body z follows the force direction and F1 = 0.
    In interaction mode pitch and yaw are held at the setpoint, roll balances
    the lateral demand, and the body-x share goes to the tilting rotors.
    """
    f_tilt = f_des if f_tilt is None else f_tilt
    norm = np.linalg.norm(f_tilt)
    if norm < 1e-6:
        raise DegenerateDirection("force demand too small to define an attitude")
    if setpoint.mode == "navigation":
        z_b = f_tilt / norm
        x_c = np.array([np.cos(setpoint.psi_des), np.sin(setpoint.psi_des), 0.0])
        y_b = cross(z_b, x_c)
        n = np.linalg.norm(y_b)
        if n < 1e-6:
            raise DegenerateDirection("thrust direction parallel to heading")
        y_b /= n
        R_des = np.column_stack([cross(y_b, z_b), y_b, z_b])
        return R_des, 0.0, float(f_des @ R[:, 2])
    if setpoint.mode == "interaction":
        R_py = rot_z(setpoint.psi_des) @ rot_y(setpoint.theta_des)
        f_local = R_py.T @ f_tilt
        roll = np.arctan2(-f_local[1], f_local[2])
        R_des = R_py @ rot_x(roll)
        return R_des, float(f_des @ R[:, 0]), float(f_des @ R[:, 2])
    raise ValueError(f"unknown mode {setpoint.mode!r}")


def attitude_error(R: np.ndarray, R_des: np.ndarray) -> np.ndarray:
    return 0.5 * vee(R_des.T @ R - R.T @ R_des)


class AttitudeController:
    """Geometric SO(3) tracking law with a clamped integral of the rotation error."""

    def __init__(self, gains: ControlGains):
        self.gains = gains
        self.integral = np.zeros(3)

    def reset(self):
        self.integral = np.zeros(3)

    def __call__(self, state: BodyState, R_des, w_des, inertia, dt: float) -> np.ndarray:
        g = self.gains
        e_R = attitude_error(state.R, R_des)
        e_w = state.w - state.R.T @ R_des @ np.asarray(w_des, dtype=float)
        self.integral = np.clip(self.integral + e_R * dt, -g.integral_limit, g.integral_limit)
        w = state.w
        return -g.K_R * e_R - g.K_w * e_w - g.K_I * self.integral + cross(w, inertia @ w)


def attitude_control(state, R_des, w_des, gains, dt, inertia, integral=None):
    """One evaluation of the attitude law; returns (torque, updated integral)."""
    ctl = AttitudeController(gains)
    if integral is not None:
        ctl.integral = np.array(integral, dtype=float)
    torque = ctl(state, R_des, w_des, inertia, dt)
    return torque, ctl.integral


class WrenchObserver:
    """First-order momentum residual; converges to the external body wrench
    with time constant 1/gain."""

    def __init__(self, params: VehicleParams, gain_lin=10.0, gain_ang=10.0):
        self.params = params
        self.gain_lin = np.broadcast_to(np.asarray(gain_lin, dtype=float), (3,)).copy()
        self.gain_ang = np.broadcast_to(np.asarray(gain_ang, dtype=float), (3,)).copy()
        self.reset()

    def reset(self):
        self._p0 = None
        self._terms = None
        self._int_lin = np.zeros(3)
        self._int_ang = np.zeros(3)
        self.r_lin = np.zeros(3)
        self.r_ang = np.zeros(3)

    @property
    def estimate(self) -> Wrench:
        return Wrench(self.r_lin.copy(), self.r_ang.copy())

    def update(self, state: BodyState, mass: MassState, actuation: Wrench, dt: float) -> Wrench:
        """Fold in the state at this tick and the actuation applied from now on."""
        m = self.params.m
        mom_lin = m * state.v
        mom_ang = mass.I @ state.w
        if self._p0 is None:
            self._p0 = (mom_lin, mom_ang)
        else:
            t_lin, t_ang = self._terms
            self._int_lin += (t_lin + self.r_lin) * dt
            self._int_ang += (t_ang + self.r_ang) * dt
            self.r_lin = self.gain_lin * (mom_lin - self._p0[0] - self._int_lin)
            self.r_ang = self.gain_ang * (mom_ang - self._p0[1] - self._int_ang)
        grav = gravity_wrench(state.R, mass, self.params)
        self._terms = (
            actuation.F + grav.F - cross(state.w, mom_lin),
            actuation.Gamma + grav.Gamma - cross(state.w, mom_ang),
        )
        return self.estimate


def wrench_observer(
    history: Iterable[tuple[BodyState, ActuatorCommand, MassState]],
    dt: float,
    params: VehicleParams,
    gain=10.0,
) -> Wrench:
    """Run the observer over recorded (state, command, mass) samples."""
    obs = WrenchObserver(params, gain, gain)
    for state, u, mass in history:
        act = u if isinstance(u, Wrench) else actuation_wrench(u, params)
        obs.update(state, mass, act, dt)
    return obs.estimate


@dataclass
class ControlOutput:
    wrench: WrenchSetpoint5
    R_des: np.ndarray
    f_des: np.ndarray


class CascadeController:
    """Position impedance -> attitude -> 5-DoF wrench demand."""

    def __init__(self, params: VehicleParams, gains: ControlGains | None = None, gravity_feedforward=True):
        self.params = params
        self.gains = gains or ControlGains()
        self.attitude = AttitudeController(self.gains)
        self.gravity_feedforward = gravity_feedforward
        self._R_des = np.eye(3)

    def reset(self):
        self.attitude.reset()
        self._R_des = np.eye(3)

    def update(self, state: BodyState, setpoint: Setpoint, mass: MassState, dt: float) -> ControlOutput:
        g = self.gains
        f_des = impedance_force(state, setpoint, g, self.params)
        f_tilt = impedance_force(state, setpoint, g, self.params, damping_scale=g.c2)
        try:
            R_des, F1, F3 = desired_attitude(f_des, setpoint, state.R, f_tilt)
            self._R_des = R_des
        except DegenerateDirection:
            R_des = self._R_des
            F1 = float(f_des @ state.R[:, 0]) if setpoint.mode == "interaction" else 0.0
            F3 = float(f_des @ state.R[:, 2])
        torque = self.attitude(state, R_des, np.zeros(3), mass.I, dt)
        if self.gravity_feedforward:
            torque = torque - gravity_wrench(state.R, mass, self.params).Gamma
        return ControlOutput(WrenchSetpoint5(F1, F3, torque), R_des, f_des)
