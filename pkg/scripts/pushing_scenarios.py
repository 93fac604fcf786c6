"""Run both pushing protocols (plate shifted / plate fixed) and tabulate the phases."""

import argparse
import json
import math
from pathlib import Path

from comshift.scenario import load_scenario, run_scenario, with_dt, write_trace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--dt", type=float, default=None, help="override the physics step")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name in ("scenario1", "scenario2"):
        cfg = load_scenario(name)
        if args.dt:
            cfg = with_dt(cfg, args.dt)
        T_group = 4 * cfg.vehicle.thrust_max
        res = run_scenario(cfg, raise_on_failure=False)
        write_trace(res.trace, out / f"{name}_trace.csv")
        (out / f"{name}_summary.json").write_text(json.dumps(res.summary, indent=2))
        print(f"\n{name}{'  FAILED: ' + res.failed if res.failed else ''}")
        print(f"{'phase':>12} {'f_c [N]':>8} {'alpha':>7} {'back/lim':>8} {'p2p pitch':>10} {'sat':>5}")
        for ph in res.summary["phases"]:
            print(f"{ph['phase']:>12} {ph['steady_contact_force']:8.2f} {math.degrees(ph['steady_alpha']):7.2f}"
                  f" {ph['steady_back_thrust'] / T_group:8.3f} {ph['pitch_p2p']:10.2e} {ph['saturation_fraction']:5.2f}")


if __name__ == "__main__":
    main()
