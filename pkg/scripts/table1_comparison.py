"""Force-exertion factor h_f for the platforms of the comparison table."""

import argparse
from pathlib import Path

from comshift.analysis import hf_factor, load_records, write_hf_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--records", default=None)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    recs = load_records(args.records)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_hf_csv(recs, out / "hf_comparison.csv")
    print(f"{'platform':>8} {'m0':>5} {'n_t':>3} {'f_p':>5} {'h_f':>6} {'listed':>6}")
    for r in recs:
        listed = "" if r.h_f_reported is None else f"{r.h_f_reported:.2f}"
        print(f"{r.name:>8} {r.m0:5.2f} {r.n_t:3d} {r.f_p:5.0f} {hf_factor(r):6.3f} {listed:>6}")


if __name__ == "__main__":
    main()
