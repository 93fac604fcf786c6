"""Newton-Euler equations of motion in the body frame and an RK4 stepper."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .actuation import ActuatorCommand, Wrench, actuation_wrench
from .vehicle import MassState, VehicleParams

E3 = np.array([0.0, 0.0, 1.0])


class IntegrationDiverged(RuntimeError):
    def __init__(self, message: str, last_state: "BodyState"):
        super().__init__(message)
        self.last_state = last_state


def cross(a, b) -> np.ndarray:
    """3-vector cross product (np.cross is slow for single vectors)."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def skew(a) -> np.ndarray:
    return np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])


def vee(S) -> np.ndarray:
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=float)


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=float)


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=float)


def from_euler(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Z-Y-X (yaw, pitch, roll) rotation, body to world."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def to_euler(R) -> tuple[float, float, float]:
    """Roll, pitch, yaw of ``R``; meaningful for |pitch| < 90 deg."""
    pitch = -np.arcsin(np.clip(R[2, 0], -1.0, 1.0))
    roll = np.arctan2(R[2, 1], R[2, 2])
    yaw = np.arctan2(R[1, 0], R[0, 0])
    return float(roll), float(pitch), float(yaw)


def orthonormalize(R) -> np.ndarray:
    """Closest rotation matrix (polar factor).

    Newton iteration for the polar factor when R is nearly orthonormal, as it
    is after an integration step; SVD otherwise.
    """
    eye = np.eye(3)
    for _ in range(4):
        err = R.T @ R - eye
        size = np.abs(err).max()
        if size > 1e-3:
            break
        R = R @ (eye - 0.5 * err)
        if size < 1e-8:
            return R
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0:
        U[:, -1] *= -1
        Q = U @ Vt
    return Q


@dataclass(frozen=True)
class BodyState:
    p: np.ndarray
    R: np.ndarray
    v: np.ndarray  # body frame
    w: np.ndarray  # body frame

    @classmethod
    def hover(cls, p=(0.0, 0.0, 0.0), R=None) -> "BodyState":
        return cls(
            np.array(p, dtype=float),
            np.eye(3) if R is None else np.array(R, dtype=float),
            np.zeros(3),
            np.zeros(3),
        )

    @property
    def v_world(self) -> np.ndarray:
        return self.R @ self.v

    def euler(self) -> tuple[float, float, float]:
        return to_euler(self.R)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.p.sum() + self.R.sum() + self.v.sum() + self.w.sum()))


def gravity_wrench(R, mass: MassState, params: VehicleParams) -> Wrench:
    """Weight in the body frame and its moment about the body origin.

    The CoM sits at body point (d, 0, 0), so the moment is
    m * S(R^T g e3) (-d, 0, 0) with g = -g_mag.
    """
    g_body = R.T @ (-params.g_mag * E3)
    force = params.m * g_body
    torque = params.m * cross(g_body, np.array([-mass.d, 0.0, 0.0]))
    return Wrench(force, torque)


ExternalWrench = Union[Wrench, Callable[[BodyState], Wrench], None]


def _derivative(p, R, v, w, F_act, G_act, d, Idiag, params, external):
    m = params.m
    gx, gy, gz = -params.g_mag * R[2]  # R^T e3 scaled by g
    F = F_act + m * np.array([gx, gy, gz])
    G = G_act + m * d * np.array([0.0, -gz, gy])
    if external is not None:
        ext = external(BodyState(p, R, v, w)) if callable(external) else external
        if ext is not None:
            F = F + ext.F
            G = G + ext.Gamma
    v_dot = F / m - cross(w, v)
    w_dot = (G - cross(w, Idiag * w)) / Idiag
    # w is body-frame, hence R' = R S(w)
    return R @ v, R @ skew(w), v_dot, w_dot


def state_derivative(
    state: BodyState,
    mass: MassState,
    u: ActuatorCommand | Wrench,
    external: ExternalWrench,
    params: VehicleParams,
) -> BodyState:
    """Time derivative of the state; returned fields hold (p', R', v', w').

    Linear and angular equations are block-diagonal (mass m, principal
    inertia I(l)); the CoM offset enters through the gravity moment only.
    ``u`` may be an actuator command or an already evaluated actuation
    wrench. ``external`` is a body-frame wrench or a callable of the state.
    """
    act = u if isinstance(u, Wrench) else actuation_wrench(u, params)
    return BodyState(*_derivative(
        state.p, state.R, state.v, state.w, act.F, act.Gamma, mass.d, np.diagonal(mass.I), params, external
    ))


def integrate_rk4(
    state: BodyState,
    mass: MassState,
    u: ActuatorCommand | Wrench,
    external: ExternalWrench,
    dt: float,
    params: VehicleParams,
) -> BodyState:
    """One classical RK4 step; R is projected back onto SO(3) afterwards."""
    if not 0 < dt <= 0.02:
        raise ValueError(f"dt must lie in (0, 0.02] s, got {dt}")
    act = u if isinstance(u, Wrench) else actuation_wrench(u, params)
    args = (act.F, act.Gamma, mass.d, np.diagonal(mass.I), params, external)
    p, R, v, w = state.p, state.R, state.v, state.w
    h = dt / 2
    k1 = _derivative(p, R, v, w, *args)
    k2 = _derivative(p + h * k1[0], R + h * k1[1], v + h * k1[2], w + h * k1[3], *args)
    k3 = _derivative(p + h * k2[0], R + h * k2[1], v + h * k2[2], w + h * k2[3], *args)
    k4 = _derivative(p + dt * k3[0], R + dt * k3[1], v + dt * k3[2], w + dt * k3[3], *args)
    c = dt / 6.0
    new = BodyState(
        p + c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        R + c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        v + c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
        w + c * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]),
    )
    if not new.is_finite():
        raise IntegrationDiverged("non-finite state after RK4 step", state)
    return BodyState(new.p, orthonormalize(new.R), new.v, new.w)
