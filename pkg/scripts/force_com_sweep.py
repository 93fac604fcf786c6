"""Contact force, front thrust and back-rotor vertical share versus the CoM ratio r_l."""

import argparse
from pathlib import Path

from comshift.analysis import rl_limit, sweep_rl, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g0", type=float, default=30.0)
    ap.add_argument("--t2", type=float, default=20.0)
    ap.add_argument("--points", type=int, default=101)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    rows = sweep_rl(args.g0, args.t2, n_points=args.points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out / "force_com.csv")

    print(f"{'r_l':>6} {'f_g':>8} {'T1':>8} {'f_c':>8}")
    for r in rows[:: max(1, len(rows) // 10)]:
        print(f"{r.r_l:6.2f} {r.f_g:8.3f} {r.T1:8.3f} {r.f_c:8.3f}{'' if r.feasible else '  (infeasible)'}")
    print(f"f_c reaches zero at r_l = {rl_limit(args.g0, args.t2):.6f}")


if __name__ == "__main__":
    main()
