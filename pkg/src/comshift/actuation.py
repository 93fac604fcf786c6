"""Rotor forces, the body-frame actuation wrench, and its inverse (control allocation).

Rotor numbering follows the airframe drawing: 1, 2, 6, 7 are the fixed front
rotors at body x = +L, and 3, 4, 5, 8 are the back rotors at x = -L that tilt
together about body y by ``alpha``. Rotors 2, 7, 3, 8 sit at y = +W and
1, 6, 4, 5 at y = -W. Torques are taken about the body origin (the geometric
centre); the CoM offset enters the dynamics through the gravity moment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vehicle import VehicleParams

FRONT = (0, 1, 5, 6)  # rotors 1, 2, 6, 7
BACK = (2, 3, 4, 7)  # rotors 3, 4, 5, 8


class InfeasibleAllocation(RuntimeError):
    """The requested wrench needs inputs outside the actuator limits.

    ``command`` is the clamped command that was produced instead and
    ``achieved`` the wrench it actually generates.
    """

    def __init__(self, reasons, command, achieved, requested, back_saturated=False):
        super().__init__("; ".join(reasons))
        self.reasons = list(reasons)
        self.command = command
        self.achieved = achieved
        self.requested = requested
        self.back_saturated = back_saturated


@dataclass(frozen=True)
class Wrench:
    F: np.ndarray
    Gamma: np.ndarray

    @classmethod
    def zero(cls) -> "Wrench":
        return cls(np.zeros(3), np.zeros(3))

    def __add__(self, other: "Wrench") -> "Wrench":
        return Wrench(self.F + other.F, self.Gamma + other.Gamma)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.F, self.Gamma])


@dataclass(frozen=True)
class WrenchSetpoint5:
    F1: float
    F3: float
    Gamma: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.array([self.F1, self.F3, *self.Gamma])

    @classmethod
    def from_wrench(cls, w: Wrench) -> "WrenchSetpoint5":
        return cls(float(w.F[0]), float(w.F[2]), np.array(w.Gamma, dtype=float))


@dataclass(frozen=True)
class ActuatorCommand:
    alpha: float
    omega: np.ndarray

    def thrusts(self, params: VehicleParams) -> np.ndarray:
        return params.k_t * np.square(self.omega)

    @classmethod
    def from_thrusts(cls, alpha: float, thrusts, params: VehicleParams) -> "ActuatorCommand":
        thrusts = np.asarray(thrusts, dtype=float)
        if np.any(thrusts < 0):
            raise ValueError("rotor thrust cannot be negative")
        return cls(float(alpha), np.sqrt(thrusts / params.k_t))

    def check(self, params: VehicleParams, tol: float = 1e-9) -> None:
        lo, hi = params.alpha_range
        if not lo - tol <= self.alpha <= hi + tol:
            raise ValueError(f"alpha={np.degrees(self.alpha):.3f} deg outside tilt range")
        if np.any(self.omega < -tol) or np.any(self.omega > params.omega_max * (1 + tol)):
            raise ValueError("rotor speed outside [0, omega_max]")


def rotor_thrust(omega: float, params: VehicleParams) -> float:
    if omega < 0:
        raise ValueError(f"rotor speed must be non-negative, got {omega}")
    return params.k_t * omega * omega


def rotor_drag(i: int, omega: float, params: VehicleParams) -> float:
    """Drag torque of rotor ``i`` (1-based) along its own thrust axis."""
    if omega < 0:
        raise ValueError(f"rotor speed must be non-negative, got {omega}")
    return params.drag_sign[i - 1] * params.k_b * omega * omega


def actuation_wrench_thrusts(alpha: float, T: np.ndarray, params: VehicleParams) -> Wrench:
    """Body-frame wrench from tilt angle and per-rotor thrusts (index 0 = rotor 1)."""
    ca, sa = np.cos(alpha), np.sin(alpha)
    tau = (params.k_b / params.k_t) * np.asarray(params.drag_sign) * T
    T1, T2, T3, T4, T5, T6, T7, T8 = T
    t_front = T1 + T2 + T6 + T7
    t_back = T3 + T4 + T5 + T8
    tau_front = tau[0] + tau[1] + tau[5] + tau[6]
    tau_back = tau[2] + tau[3] + tau[4] + tau[7]
    F = np.array([t_back * sa, 0.0, t_back * ca + t_front])
    Gamma = np.array([
        (T2 + T7 - T1 - T6 + (T3 + T8 - T4 - T5) * ca) * params.W + tau_back * sa,
        (t_back * ca - t_front) * params.L,
        (T4 + T5 - T3 - T8) * sa * params.W + tau_back * ca + tau_front,
    ])
    return Wrench(F, Gamma)


def actuation_wrench(cmd: ActuatorCommand, params: VehicleParams) -> Wrench:
    return actuation_wrench_thrusts(cmd.alpha, cmd.thrusts(params), params)


_SIDE = np.array([-1, 1, 1, -1, -1, -1, 1, 1], dtype=float)  # sign of rotor y position
_IS_FRONT = np.isin(np.arange(8), FRONT).astype(float)
_IS_BACK = 1.0 - _IS_FRONT


def allocation_matrix(alpha: float, params: VehicleParams) -> np.ndarray:
    """5x8 map from rotor thrusts to (F1, F3, Gamma1, Gamma2, Gamma3) at fixed tilt."""
    ca, sa = np.cos(alpha), np.sin(alpha)
    W, L = params.W, params.L
    kappa = params.k_b / params.k_t * np.asarray(params.drag_sign, dtype=float)
    f, b = _IS_FRONT, _IS_BACK
    return np.array([
        b * sa,
        f + b * ca,
        f * _SIDE * W + b * (_SIDE * W * ca + kappa * sa),
        L * (b * ca - f),
        f * kappa + b * (-_SIDE * W * sa + kappa * ca),
    ])


def _distribute(alpha, t_front, t_back, gamma1, gamma3, params):
    A = allocation_matrix(alpha, params)
    rows = np.array([_IS_FRONT, _IS_BACK, A[2], A[4]])
    rhs = np.array([t_front, t_back, gamma1, gamma3])
    # minimum-norm solution of the under-determined 4x8 system
    return rows.T @ np.linalg.solve(rows @ rows.T, rhs)


def allocate(setpoint: WrenchSetpoint5, params: VehicleParams, tol: float = 1e-9) -> ActuatorCommand:
    """Tilt angle and rotor speeds that realise a 5-DoF body wrench.

    Group totals come in closed form from the F1, F3 and Gamma2 rows; the
    thrust inside each group is the minimum-norm split satisfying the
    Gamma1 and Gamma3 rows. Demands outside the actuator limits raise
    :class:`InfeasibleAllocation` carrying the clamped command.
    """
    vec = setpoint.as_vector()
    if not np.all(np.isfinite(vec)):
        raise ValueError("wrench setpoint must be finite")
    F1, F3, g1, g2, g3 = vec
    L = params.L
    t_front = 0.5 * (F3 - g2 / L)
    bz = 0.5 * (F3 + g2 / L)
    t_back = float(np.hypot(F1, bz))
    alpha = float(np.arctan2(F1, bz)) if t_back > 0 else 0.0

    lo, hi = params.alpha_range
    t_group_max = 4 * params.thrust_max
    reasons = []
    back_saturated = False
    if t_front < -tol:
        reasons.append(f"front group needs negative thrust ({t_front:.4g} N)")
        t_front = 0.0
    elif t_front > t_group_max * (1 + tol):
        reasons.append(f"front group thrust {t_front:.4g} N above limit {t_group_max:.4g} N")
        t_front = t_group_max
    if not lo - tol <= alpha <= hi + tol:
        reasons.append(f"tilt {np.degrees(alpha):.2f} deg outside range")
        alpha = float(np.clip(alpha, lo, hi))
        t_back = max(0.0, F1 * np.sin(alpha) + bz * np.cos(alpha))
    if t_back > t_group_max * (1 + tol):
        reasons.append(f"back group thrust {t_back:.4g} N above limit {t_group_max:.4g} N")
        back_saturated = True
        # keep the vertical share, give up horizontal force
        vertical = t_back * np.cos(alpha)
        if vertical < t_group_max:
            alpha = float(np.copysign(np.arccos(vertical / t_group_max), alpha))
        t_back = t_group_max

    T = _distribute(alpha, t_front, t_back, g1, g3, params)
    T_max = params.thrust_max
    if np.any(T < -tol * max(1.0, T_max)):
        reasons.append(f"rotor {int(np.argmin(T)) + 1} needs negative thrust ({T.min():.4g} N)")
    if np.any(T > T_max * (1 + tol)):
        i = int(np.argmax(T))
        reasons.append(f"rotor {i + 1} thrust {T[i]:.4g} N above limit {T_max:.4g} N")
        back_saturated = back_saturated or i in BACK
    T = np.clip(T, 0.0, T_max)
    cmd = ActuatorCommand(alpha, np.sqrt(T / params.k_t))
    if reasons:
        raise InfeasibleAllocation(
            reasons, cmd, actuation_wrench(cmd, params), setpoint, back_saturated=back_saturated
        )
    return cmd
