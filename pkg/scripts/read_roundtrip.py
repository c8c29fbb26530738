"""Read random arrays and report recovery error and flux drift per array size."""

import argparse

import numpy as np

from memgrid import CrossbarState, MemductanceModel, make_read_schedule, read_array


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-dim", type=int, default=16)
    ap.add_argument("--tau", type=float, default=0.1)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    model = MemductanceModel.sigmoid(1.0, 3.0, 1.0)
    print(f"{'size':>7} {'max rel err':>12} {'flux drift':>11}")
    for d in range(1, args.max_dim + 1):
        state = CrossbarState.uniform(d, d, model, rng.uniform(-4, 4, d * d))
        w_hat, after = read_array(state, make_read_schedule(d, args.tau, 1.0))
        rel = np.max(np.abs(w_hat - state.memductances()) / state.memductances())
        drift = np.max(np.abs(after.phi - state.phi))
        print(f"{d:>3}x{d:<3} {rel:12.2e} {drift:11.2e}")


if __name__ == "__main__":
    main()
