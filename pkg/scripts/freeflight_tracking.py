"""Step responses of the 5-DoF controller in free flight: 0.5 m position steps and 10 deg attitude steps."""

import argparse
import math
from pathlib import Path

import numpy as np

from comshift.scenario import load_scenario, run_scenario, write_trace

STEPS = [  # (column, phase, next phase, target, step size)
    ("x", "step_x", "step_y", 0.5, 0.5),
    ("y", "step_y", "step_z", 0.5, 0.5),
    ("z", "step_z", "step_pitch", 1.5, 0.5),
    ("pitch", "step_pitch", "step_yaw", math.radians(10), math.radians(10)),
    ("yaw", "step_yaw", "hold", math.radians(10), math.radians(10)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--band", type=float, default=0.02, help="settling band as a fraction of the step")
    args = ap.parse_args()
    res = run_scenario(load_scenario("freeflight"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(res.trace, out / "freeflight_trace.csv")

    t = res.trace["t"]
    starts = {e.name: e.t for e in res.config.events}
    for col, a, b, target, step in STEPS:
        m = (t >= starts[a]) & (t < starts[b])
        err = res.trace[col][m] - target
        late = np.nonzero(np.abs(err) >= args.band * step)[0]
        settle = 0.0 if len(late) == 0 else t[m][late[-1]] - starts[a]
        overshoot = 100 * max(0.0, np.max(np.sign(step) * err)) / abs(step)
        print(f"{col:>5}: settles in {settle:5.2f} s, overshoot {overshoot:5.1f}%")


if __name__ == "__main__":
    main()
