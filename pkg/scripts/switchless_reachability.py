"""Fraction of random flux targets reachable with all switches closed, per array shape.

With every switch closed the reachable flux changes form the range of D^T,
of dimension m+n-1 out of mn, so random targets are (almost) never reachable
once m, n >= 2.
"""

import argparse

import numpy as np

from memgrid import CrossbarState, MemductanceModel, build_incidence, reachable_without_switches


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--draws", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    model = MemductanceModel.sigmoid(1.0, 3.0, 1.0)
    print(f"{'m':>2} {'n':>2} {'rank D':>6} {'mn':>4} {'reachable':>9}")
    for m in range(1, 6):
        for n in range(1, 6):
            state = CrossbarState.uniform(m, n, model)
            hits = sum(reachable_without_switches(state, rng.normal(size=m * n)) for _ in range(args.draws))
            rank = np.linalg.matrix_rank(build_incidence(m, n))
            print(f"{m:>2} {n:>2} {rank:>6} {m * n:>4} {hits / args.draws:>9.2f}")


if __name__ == "__main__":
    main()
