"""Largest wall-pressed trim force as the CoM moves from the centre to the front rotors.

For each plate position the target force is bisected against the trim
solver's actuator limits, then compared with the planar closed form.
"""

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from comshift.analysis import TrimInfeasible, rl_from_displacement, trim_solve
from comshift.vehicle import MassState, load_vehicle


def max_force(mass, params, hi=60.0, tol=1e-6):
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        try:
            trim_solve(mass, mid, params)
            lo = mid
        except TrimInfeasible:
            hi = mid
    return lo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=None, help="vehicle YAML")
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    params = load_vehicle(args.config)
    T_group = 4 * params.thrust_max

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trim_envelope.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["l_m", "d_m", "r_l", "f_max_N", "f_max_planar_N", "alpha_deg"])
        for l in np.linspace(0.0, params.l_max, args.points + 1):
            mass = MassState.at(float(l), params)
            f = max_force(mass, params)
            f_g = params.weight * rl_from_displacement(mass.d, params)
            planar = math.sqrt(max(T_group**2 - f_g**2, 0.0))
            alpha = math.degrees(trim_solve(mass, f, params).alpha)
            w.writerow([f"{l:.4f}", f"{mass.d:.4f}", f"{rl_from_displacement(mass.d, params):.4f}",
                        f"{f:.4f}", f"{planar:.4f}", f"{alpha:.2f}"])
            print(f"l={l:.3f} m  d={mass.d:.4f} m  f_max={f:7.3f} N  planar={planar:7.3f} N  alpha={alpha:6.2f} deg")


if __name__ == "__main__":
    main()
