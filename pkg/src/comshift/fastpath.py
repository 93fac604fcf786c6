"""Compiled RK4 step for the scenario loop (rigid body + wall contact).

Same model as :func:`dynamics.integrate_rk4` with
:func:`contact.contact_wrench` as the external wrench; the test suite checks
the two paths against each other.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .actuation import Wrench
from .contact import WallModel
from .dynamics import BodyState, IntegrationDiverged
from .vehicle import MassState, VehicleParams


@njit(cache=True)
def _contact(p, R, v, w, a, wall):
    # wall = (point xyz, normal xyz, k_n, c_n, mu, v_reg)
    F = np.zeros(3)
    G = np.zeros(3)
    tip = p + R[:, 0] * a
    n = wall[3:6]
    depth = -((tip[0] - wall[0]) * n[0] + (tip[1] - wall[1]) * n[1] + (tip[2] - wall[2]) * n[2])
    if depth <= 0.0:
        return F, G, 0.0, 0.0
    vb = np.array([v[0], v[1] + a * w[2], v[2] - a * w[1]])
    v_tip = R @ vb
    vn = v_tip[0] * n[0] + v_tip[1] * n[1] + v_tip[2] * n[2]
    f_n = max(0.0, wall[6] * depth - wall[7] * vn)
    f_world = f_n * n
    v_t = v_tip - vn * n
    speed = math.sqrt(v_t[0] ** 2 + v_t[1] ** 2 + v_t[2] ** 2)
    if speed > 0.0 and wall[8] > 0.0:
        f_world = f_world - (wall[8] * f_n * math.tanh(speed / wall[9]) / speed) * v_t
    F = R.T @ f_world
    G[1] = -a * F[2]
    G[2] = a * F[1]
    return F, G, depth, f_n


@njit(cache=True)
def _deriv(p, R, v, w, F_act, G_act, m, g, d, Idiag, a, wall, has_wall, ext_world):
    gb = -g * R[2]
    F = F_act + m * gb
    G = G_act.copy()
    G[1] -= m * d * gb[2]
    G[2] += m * d * gb[1]
    if has_wall:
        Fc, Gc, _, _ = _contact(p, R, v, w, a, wall)
        F = F + Fc
        G = G + Gc
    F = F + R.T @ ext_world
    v_dot = np.empty(3)
    v_dot[0] = F[0] / m - (w[1] * v[2] - w[2] * v[1])
    v_dot[1] = F[1] / m - (w[2] * v[0] - w[0] * v[2])
    v_dot[2] = F[2] / m - (w[0] * v[1] - w[1] * v[0])
    Iw = Idiag * w
    w_dot = np.empty(3)
    w_dot[0] = (G[0] - (w[1] * Iw[2] - w[2] * Iw[1])) / Idiag[0]
    w_dot[1] = (G[1] - (w[2] * Iw[0] - w[0] * Iw[2])) / Idiag[1]
    w_dot[2] = (G[2] - (w[0] * Iw[1] - w[1] * Iw[0])) / Idiag[2]
    S = np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    return R @ v, R @ S, v_dot, w_dot


@njit(cache=True)
def _rk4(p, R, v, w, F_act, G_act, m, g, d, Idiag, a, wall, has_wall, ext_world, dt):
    h = 0.5 * dt
    a1, b1, c1, d1 = _deriv(p, R, v, w, F_act, G_act, m, g, d, Idiag, a, wall, has_wall, ext_world)
    a2, b2, c2, d2 = _deriv(p + h * a1, R + h * b1, v + h * c1, w + h * d1,
                            F_act, G_act, m, g, d, Idiag, a, wall, has_wall, ext_world)
    a3, b3, c3, d3 = _deriv(p + h * a2, R + h * b2, v + h * c2, w + h * d2,
                            F_act, G_act, m, g, d, Idiag, a, wall, has_wall, ext_world)
    a4, b4, c4, d4 = _deriv(p + dt * a3, R + dt * b3, v + dt * c3, w + dt * d3,
                            F_act, G_act, m, g, d, Idiag, a, wall, has_wall, ext_world)
    k = dt / 6.0
    p_new = p + k * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    R_new = R + k * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    v_new = v + k * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
    w_new = w + k * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
    eye = np.eye(3)
    for _ in range(4):
        err = R_new.T @ R_new - eye
        size = np.abs(err).max()
        if size > 1e-3:
            break
        R_new = R_new @ (eye - 0.5 * err)
        if size < 1e-8:
            break
    return p_new, R_new, v_new, w_new


def wall_array(wall: WallModel | None) -> np.ndarray:
    if wall is None:
        return np.zeros(10)
    return np.concatenate([wall.point, wall.normal, [wall.k_n, wall.c_n, wall.mu, wall.v_reg]])


@njit(cache=True)
def _rk4_n(p, R, v, w, F_act, G_act, m, g, d, Idiag, a, wall, has_wall, ext_world, dt, n):
    for _ in range(n):
        p, R, v, w = _rk4(p, R, v, w, F_act, G_act, m, g, d, Idiag, a, wall, has_wall, ext_world, dt)
    return p, R, v, w


def step(
    state: BodyState,
    mass: MassState,
    act: Wrench,
    wall: WallModel | None,
    ext_world: np.ndarray,
    dt: float,
    params: VehicleParams,
    wall_arr: np.ndarray | None = None,
    n: int = 1,
) -> BodyState:
    """``n`` RK4 steps of ``dt`` with the wall wrench and a constant world-frame force."""
    if wall_arr is None:
        wall_arr = wall_array(wall)
    p, R, v, w = _rk4_n(
        state.p, state.R, state.v, state.w, act.F, act.Gamma, params.m, params.g_mag,
        mass.d, np.diagonal(mass.I).copy(), params.tip_offset, wall_arr, wall is not None,
        np.asarray(ext_world, dtype=float), dt, n,
    )
    new = BodyState(p, R, v, w)
    if not new.is_finite() or np.abs(R.T @ R - np.eye(3)).max() > 1e-6:
        raise IntegrationDiverged("non-finite state after RK4 step", state)
    return new
