#!/usr/bin/env python3
"""Scan the weighted coupling coefficients (k+1)|<mu, phi_k>| of an indicator
potential against the symmetric-well Laplacian basis.

Rational breakpoints produce exact zeros (an uncontrollable subspace);
irrational breakpoints only lose the lower bound gradually.  Example:

    python scripts/scan_obstruction.py --a 0 --b 0.41421356 --K 100000
"""

import argparse
import csv
import os

import numpy as np

from bilinctrl.potentials import indicator, neumann_obstruction_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=1.0 / 3.0)
    ap.add_argument("--b", type=float, default=2.0 / 3.0)
    ap.add_argument("--K", type=int, default=10_000)
    ap.add_argument("-o", "--output-dir", default="out/obstruction")
    args = ap.parse_args()

    mu = indicator(args.a, args.b)
    report = neumann_obstruction_scan(mu, args.K)
    os.makedirs(args.output_dir, exist_ok=True)
    path = os.path.join(args.output_dir, "scan.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "weighted_abs", "running_min"])
        writer.writerows(zip(report.indices, report.weighted,
                             report.running_min))

    zeros = [int(k) for k, w in zip(report.indices, report.weighted)
             if abs(w) < 1e-12]
    print(f"indicator on [{args.a:g}, {args.b:g}], K={args.K}")
    print(f"initial level {report.initial_level:.6g}, running minimum "
          f"{report.final_min:.6g} "
          f"({report.final_min / report.initial_level:.3e} of initial)")
    if zeros:
        print(f"{len(zeros)} exact zeros, first few: {zeros[:8]}")
    else:
        print("no exact zeros found")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
