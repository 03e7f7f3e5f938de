"""Weight-12 density against the optimized periodized heat-kernel majorant on a
fundamental-domain grid; CSV (x, y, s_kappa, t_opt, bound, ratio)."""
import argparse
import csv
import sys

import numpy as np

from siegel_heat import modular_oracle as mo
from siegel_heat import supnorm as sn


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nx", type=int, default=5)
    ap.add_argument("--ny", type=int, default=4)
    ap.add_argument("--bound", type=int, default=6, help="entry bound for the SL2(Z) elements")
    ap.add_argument("--ts", type=int, default=10, help="number of t values in [0.05, 20]")
    args = ap.parse_args()
    elements = sn.sl2z_elements(args.bound)
    ts = np.geomspace(0.05, 20, args.ts)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["x", "y", "s_kappa", "t_opt", "bound", "ratio"])
    for z in mo.fundamental_domain_grid(args.nx, args.ny):
        t, bound, _ = sn.optimize_periodized_bound(1, np.array([[z]]), 12, elements, ts)
        s = mo.s_kappa_direct(z)
        w.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", f"{s:.17g}", f"{t:.6g}", f"{bound:.17g}",
                    f"{s / bound:.6g}"])


if __name__ == "__main__":
    main()
