"""Iterations needed by the single-cell write controller as a function of alpha*T*beta.

Writes a CSV with one row per (gain fraction, target) pair. Gains at or above
2 are included to show where the controller refuses to run.
"""

import argparse
import csv
import sys

import numpy as np

from memgrid import CrossbarState, GainError, MemductanceModel, WriteConfig, lipschitz_bound, write_cell


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="1,3,1", help="sigmoid w_min,w_max,c")
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--phi0", type=float, default=0.0)
    ap.add_argument("--targets", type=int, default=9)
    ap.add_argument("-o", "--out", default="-")
    args = ap.parse_args()

    model = MemductanceModel.sigmoid(*map(float, args.model.split(",")))
    beta = lipschitz_bound(model)
    lo, hi = model.range
    state = CrossbarState.uniform(1, 1, model, [args.phi0])
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["gain", "target", "iterations", "t_hat", "final_error"])
    for gain in [0.05, 0.1, 0.25, 0.5, 1.0, 1.5, 1.9, 1.99, 2.0]:
        for target in np.linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), args.targets):
            cfg = WriteConfig(alpha=gain / beta, period=1.0, epsilon=args.eps)
            try:
                after, tr = write_cell(state, 0, 0, target, cfg)
            except GainError:
                w.writerow([gain, target, "", "", "gain rejected"])
                continue
            err = abs(after.memductances()[0, 0] - target)
            w.writerow([gain, target, tr.iterations, tr.t_hat, err])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
