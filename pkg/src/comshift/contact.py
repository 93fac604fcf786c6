"""Alignment-frame tip kinematics and a compliant wall contact."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actuation import Wrench
from .dynamics import BodyState
from .vehicle import VehicleParams


@dataclass(frozen=True)
class WallModel:
    x_wall: float = 1.0
    # unit normal pointing out of the wall into free space
    normal: np.ndarray = field(default_factory=lambda: np.array([-1.0, 0.0, 0.0]))
    k_n: float = 2000.0
    c_n: float = 50.0
    mu: float = 0.1
    v_reg: float = 0.01

    def __post_init__(self):
        if self.k_n < 0 or self.c_n < 0 or self.mu < 0:
            raise ValueError("wall stiffness, damping and friction must be non-negative")
        if self.v_reg <= 0:
            raise ValueError("v_reg must be positive")
        n = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError("wall normal must be a unit vector")
        object.__setattr__(self, "normal", n)

    @property
    def point(self) -> np.ndarray:
        # the plane passes through x_wall measured along the inward direction
        return -self.x_wall * self.normal


@dataclass(frozen=True)
class ContactReport:
    in_contact: bool
    penetration: float
    normal_force: float
    tip_world: np.ndarray


def tip_body(params: VehicleParams) -> np.ndarray:
    return np.array([params.tip_offset, 0.0, 0.0])


def tip_position(state: BodyState, params: VehicleParams) -> np.ndarray:
    return state.p + state.R @ tip_body(params)


def contact_wrench(state: BodyState, wall: WallModel, params: VehicleParams) -> tuple[Wrench, ContactReport]:
    """Body-frame wall wrench, torque about the body origin."""
    a = params.tip_offset
    R = state.R
    n = wall.normal
    tip = state.p + R[:, 0] * a
    depth = -float(n @ (tip - wall.point))
    if depth <= 0.0:
        return Wrench.zero(), ContactReport(False, 0.0, 0.0, tip)
    w = state.w
    # w x (a, 0, 0) = (0, a w_z, -a w_y)
    v_tip = R @ (state.v + np.array([0.0, a * w[2], -a * w[1]]))
    vn = float(n @ v_tip)
    f_n = max(0.0, wall.k_n * depth - wall.c_n * vn)
    f_world = f_n * n
    v_t = v_tip - vn * n
    speed = math.sqrt(float(v_t @ v_t))
    if speed > 0.0 and wall.mu > 0.0:
        f_world = f_world - (wall.mu * f_n * math.tanh(speed / wall.v_reg) / speed) * v_t
    F = R.T @ f_world
    # (a, 0, 0) x F
    return Wrench(F, np.array([0.0, -a * F[2], a * F[1]])), ContactReport(True, depth, f_n, tip)
