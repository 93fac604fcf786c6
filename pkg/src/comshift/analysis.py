"""Static analyses: planar equilibrium of the pushing vehicle, the CoM-ratio
sweep, the force-exertion comparison factor, and a wall-pressed trim solver
for the full model."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import optimize

from .actuation import BACK, FRONT, actuation_wrench_thrusts
from .contact import tip_body
from .dynamics import gravity_wrench
from .vehicle import LimitViolation, MassState, VehicleParams

TABLE1 = Path(__file__).parent / "data" / "table1_platforms.csv"


class InfeasibleEquilibrium(ValueError):
    pass


class TrimInfeasible(RuntimeError):
    def __init__(self, message: str, binding: str, solution=None):
        super().__init__(message)
        self.binding = binding
        self.solution = solution


@dataclass(frozen=True)
class PlanarEquilibriumCase:
    G0: float = 30.0
    T2: float = 20.0
    r_l: float = 0.5
    span: float = 0.27

    def __post_init__(self):
        if self.G0 <= 0 or self.T2 <= 0:
            raise ValueError("G0 and T2 must be positive")
        if not 0.0 <= self.r_l <= 1.0:
            raise ValueError(f"r_l must lie in [0, 1], got {self.r_l}")

    @property
    def l1(self) -> float:
        return self.r_l * self.span

    @property
    def l2(self) -> float:
        return (1.0 - self.r_l) * self.span


def equilibrium_forces(case: PlanarEquilibriumCase) -> tuple[float, float, float]:
    """(f_g, T1, f_c): back-rotor vertical share, front thrust, contact force."""
    f_g = case.G0 * case.r_l
    T1 = case.G0 * (1.0 - case.r_l)
    rem = case.T2**2 - f_g**2
    if rem < 0.0 and rem > -1e-12 * case.T2**2:
        rem = 0.0  # rounding at the boundary r_l = T2/G0
    if rem < 0.0:
        raise InfeasibleEquilibrium(
            f"back thrust T2={case.T2} N cannot carry f_g={f_g:.6g} N (r_l={case.r_l})"
        )
    return f_g, T1, math.sqrt(rem)


def rl_limit(G0: float, T2: float) -> float:
    """Largest r_l with a real contact force; f_c reaches zero there."""
    return min(1.0, T2 / G0)


def rl_from_displacement(d: float, params: VehicleParams) -> float:
    # front arm l1 = L - d, back arm l2 = L + d
    return (params.L - d) / (2.0 * params.L)


@dataclass(frozen=True)
class SweepRow:
    r_l: float
    f_g: float
    T1: float
    f_c: float
    feasible: bool


def sweep_rl(G0=30.0, T2=20.0, span=0.27, n_points=101) -> list[SweepRow]:
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    rows = []
    for r_l in np.linspace(0.0, 1.0, n_points):
        case = PlanarEquilibriumCase(G0, T2, float(r_l), span)
        try:
            f_g, T1, f_c = equilibrium_forces(case)
            rows.append(SweepRow(case.r_l, f_g, T1, f_c, True))
        except InfeasibleEquilibrium:
            rows.append(SweepRow(case.r_l, G0 * case.r_l, G0 * (1 - case.r_l), 0.0, False))
    return rows


SWEEP_COLUMNS = ("r_l", "f_g_N", "T1_N", "f_c_N", "feasible")


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([f"{r.r_l:.6f}", f"{r.f_g:.6f}", f"{r.T1:.6f}", f"{r.f_c:.6f}", int(r.feasible)])


# ---------------------------------------------------------------------------
# force-exertion comparison


@dataclass(frozen=True)
class PlatformRecord:
    name: str
    m0: float
    dof: int
    n_t: int
    f_p: float
    h_f_reported: float | None = None

    def __post_init__(self):
        if min(self.m0, self.dof, self.n_t, self.f_p) <= 0:
            raise ValueError(f"platform record {self.name!r} needs positive fields")


def hf_factor(record: PlatformRecord) -> float:
    return record.f_p / (9.8 * record.m0 * record.n_t)


def load_records(path=None) -> list[PlatformRecord]:
    path = TABLE1 if path is None else Path(path)
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            reported = row.get("h_f_reported") or None
            out.append(PlatformRecord(
                name=row["name"],
                m0=float(row["m0_kg"]),
                dof=int(row["dof"]),
                n_t=int(row["n_t"]),
                f_p=float(row["f_p_N"]),
                h_f_reported=float(reported) if reported else None,
            ))
    return out


HF_COLUMNS = ("name", "m0_kg", "dof", "n_t", "f_p_N", "h_f", "h_f_reported")


def write_hf_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HF_COLUMNS)
        for r in records:
            reported = "" if r.h_f_reported is None else f"{r.h_f_reported:.2f}"
            w.writerow([r.name, f"{r.m0:.2f}", r.dof, r.n_t, f"{r.f_p:g}", f"{hf_factor(r):.2f}", reported])


# ---------------------------------------------------------------------------
# wall trim of the full model


@dataclass(frozen=True)
class TrimResult:
    alpha: float
    T_front: float
    T_back: float
    residual: float
    thrusts: np.ndarray
    contact_force: float


def _trim_thrusts(t_front, t_back):
    T = np.zeros(8)
    T[list(FRONT)] = t_front / 4.0
    T[list(BACK)] = t_back / 4.0
    return T


def _trim_residual(x, mass, target_fc, params):
    alpha, t_front, t_back = x
    act = actuation_wrench_thrusts(alpha, _trim_thrusts(t_front, t_back), params)
    grav = gravity_wrench(np.eye(3), mass, params)
    # level attitude: the wall pushes back along -x through the tip
    f_contact = np.array([-target_fc, 0.0, 0.0])
    total_F = act.F + grav.F + f_contact
    total_G = act.Gamma + grav.Gamma + np.cross(tip_body(params), f_contact)
    return np.concatenate([total_F, total_G])


def trim_solve(mass: MassState, target_fc: float, params: VehicleParams, tol=1e-9) -> TrimResult:
    """Tilt and group thrusts holding the level vehicle against a vertical wall
    with contact force ``target_fc``, thrust split evenly inside each group."""
    if not -1e-12 <= mass.d <= params.L + 1e-12:
        raise LimitViolation(f"CoM offset d={mass.d:.6g} m outside [0, L]", bound="0 <= d <= L")
    if target_fc < 0:
        raise ValueError("target contact force must be non-negative")
    w = params.weight
    guess = np.array([math.atan2(target_fc, w / 2), w / 2, math.hypot(target_fc, w / 2)])

    def reduced(x):
        r = _trim_residual(x, mass, target_fc, params)
        return r[[0, 2, 4]]

    sol = optimize.root(reduced, guess, method="hybr", options={"xtol": 1e-15})
    x = sol.x
    # Newton polish on the 3x3 system
    for _ in range(5):
        r = reduced(x)
        if np.linalg.norm(r) < 1e-13:
            break
        J = optimize.approx_fprime(x, reduced, 1e-7)
        x = x - np.linalg.lstsq(J, r, rcond=None)[0]
    alpha, t_front, t_back = (float(v) for v in x)
    if t_back < 0:
        alpha, t_back = alpha + math.pi, -t_back
    alpha = math.atan2(math.sin(alpha), math.cos(alpha))
    residual = float(np.linalg.norm(_trim_residual([alpha, t_front, t_back], mass, target_fc, params)))
    result = TrimResult(alpha, t_front, t_back, residual, _trim_thrusts(t_front, t_back), target_fc)
    if residual > tol:
        raise TrimInfeasible(f"trim did not converge (residual {residual:.3g})", "convergence", result)
    lo, hi = params.alpha_range
    t_group_max = 4 * params.thrust_max
    if t_front < -tol:
        raise TrimInfeasible(f"front group needs {t_front:.4g} N", "T_front >= 0", result)
    if not lo - 1e-9 <= alpha <= hi + 1e-9:
        raise TrimInfeasible(f"tilt {math.degrees(alpha):.2f} deg outside range", "alpha_range", result)
    if t_back > t_group_max * (1 + 1e-12):
        raise TrimInfeasible(f"back group needs {t_back:.4g} N > {t_group_max:.4g} N", "omega_max (back)", result)
    if t_front > t_group_max * (1 + 1e-12):
        raise TrimInfeasible(f"front group needs {t_front:.4g} N > {t_group_max:.4g} N", "omega_max (front)", result)
    return result
