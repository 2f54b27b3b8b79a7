"""Cross-check three independent evaluations of f_k(z).

direct: the truncated series of f_k itself; residue: the recurrence built
from f_{k-1}; contour: trapezoidal quadrature of the Cauchy-integral form.
Prints the three pairwise gaps per sample point.

    python3 scripts/oracle_triangle.py --preset classical --k 3
"""

import argparse

import numpy as np

from collatz_gf.presets import PRESETS, get_preset
from collatz_gf.quadrature import PolyCircle, choose_radius, contour_recursion_rhs
from collatz_gf.series import eval_series, orbit_series_range
from collatz_gf.verify import DEFAULT_LIMITS, DEFAULT_NODES, default_sample_points, recurrence_rhs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="3n+1", choices=sorted(PRESETS))
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("-M", type=int, help="nodes per circle")
    args = ap.parse_args()

    cmap = get_preset(args.preset)
    lim = (DEFAULT_LIMITS[cmap.d],) * cmap.d
    M = args.M or DEFAULT_NODES[cmap.d]
    fs = orbit_series_range(cmap, args.k, lim)
    print("z\tdirect-residue\tresidue-contour\tdirect-contour")
    for z in default_sample_points(cmap.d):
        direct = np.array([eval_series(c, z) for c in fs[args.k].components])
        res = recurrence_rhs(cmap, fs[args.k - 1], z, args.k - 1)
        quad = contour_recursion_rhs(cmap, fs[args.k - 1], z, PolyCircle(choose_radius(cmap, z), M))
        gaps = [np.max(np.abs(a - b)) for a, b in ((direct, res), (res, quad), (direct, quad))]
        print(",".join(f"{v:.3g}" for v in z) + "\t" + "\t".join(f"{g:.2e}" for g in gaps))


if __name__ == "__main__":
    main()
