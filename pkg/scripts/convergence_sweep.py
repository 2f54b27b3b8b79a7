"""Fitted geometric ratio of the w-series increments as |w| sweeps towards R_w.

Prints one row per (w, z) with the fitted ratio, the bound |w|/R_w and the
first k from which the increments are monotone (plain and in odd/even pairs).

    python3 scripts/convergence_sweep.py --preset 3n+1 --K 40
"""

import argparse
import json

from collatz_gf.dynamics import radius_R_w
from collatz_gf.presets import PRESETS, get_preset
from collatz_gf.verify import CheckSpec, check_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="3n+1", choices=sorted(PRESETS))
    ap.add_argument("--K", type=int, default=40)
    ap.add_argument("--fractions", default="0.2,0.4,0.6,0.75,0.9", help="|w| as fractions of R_w")
    ap.add_argument("--json", help="also write the rows to this file")
    args = ap.parse_args()

    cmap = get_preset(args.preset)
    R = float(radius_R_w(cmap))
    lim = (600,) if cmap.d == 1 else (64,) * cmap.d
    rows = []
    print(f"{args.preset}: R_w = {radius_R_w(cmap)}")
    print("|w|\tz\tratio\tbound\tk0\tk0_pairs")
    for frac in (float(v) for v in args.fractions.split(",")):
        w = frac * R
        rep = check_convergence(cmap, CheckSpec("convergence", w_values=(w,), K=args.K, limits=lim))
        for r in rep.records:
            z = ",".join(f"{complex(*p):.3g}" for p in r.inputs["z"])
            print(f"{w:.3f}\t{z}\t{r.lhs.real:.4f}\t{r.rhs.real - 0.05:.4f}\t{r.detail['k0']}\t{r.detail['k0_stride2']}")
            rows.append({"w": w, "z": r.inputs["z"], "ratio": r.lhs.real, **r.detail})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
