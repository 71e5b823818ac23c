"""Write equilibrium prices and utilities over a log-spaced range of K to CSV, optionally plotting them."""

import argparse
import csv

import numpy as np

from pab_sfe.analysis import k_sweep
from pab_sfe.scenario_io import load_preset


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--output", default="k_sweep.csv")
    parser.add_argument("--points", type=int, default=25)
    parser.add_argument("--k-min", type=float, default=0.5)
    parser.add_argument("--k-max", type=float, default=1000.0)
    parser.add_argument("--plot", help="also save a PNG (needs matplotlib)")
    args = parser.parse_args()

    base = load_preset("paper-k5").scenario
    Ks = np.geomspace(args.k_min, args.k_max, args.points)
    rows = k_sweep(base, [float(k) for k in Ks])
    n = base.n_firms
    with open(args.output, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["K", "p_star", "converged", *[f"p_{i + 1}" for i in range(n)], *[f"u_{i + 1}" for i in range(n)]])
        for r in rows:
            w.writerow([r.K, r.clearing_price, r.converged, *r.breakpoints, *r.utilities])
    print(f"wrote {len(rows)} rows to {args.output}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        ax1.semilogx(Ks, [r.clearing_price for r in rows])
        ax1.set(xlabel="K", ylabel="clearing price")
        for i in range(n):
            ax2.semilogx(Ks, [r.utilities[i] for r in rows], label=f"firm {i + 1}")
        ax2.set(xlabel="K", ylabel="utility")
        ax2.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)
        print(f"saved {args.plot}")


if __name__ == "__main__":
    main()
