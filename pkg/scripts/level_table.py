"""Cofinite bound constants across levels: total constant and the leading (j = 0) part."""
import argparse
import csv
import sys

from siegel_heat import supnorm as sn


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--degrees", default="1,2,3")
    ap.add_argument("--kappas", default="48,400,4000")
    ap.add_argument("--levels", default="1,2,4")
    args = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "kappa", "level", "exponent", "constant", "leading_constant"])
    for n in (int(x) for x in args.degrees.split(",")):
        for k in (float(x) for x in args.kappas.split(",")):
            for level in (int(x) for x in args.levels.split(",")):
                rep = sn.cofinite_bound(n, k, level=level)
                lead = rep.factors["cusp_local_factor"] * rep.factors["cusp_sums"][0] / k ** float(rep.exponent)
                w.writerow([n, k, level, str(rep.exponent), f"{rep.constant_estimate:.17g}", f"{lead:.17g}"])


if __name__ == "__main__":
    main()
