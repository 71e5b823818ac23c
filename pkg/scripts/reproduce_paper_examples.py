"""Solve the three worked four-firm markets and Example 1, printing a comparison table."""

import argparse

from pab_sfe import find_equilibrium, verify_nash
from pab_sfe.analysis import Quadruple, increasing_differences_sides
from pab_sfe.scenario_io import load_preset

REFERENCE = {
    "paper-k5": ((5.68, 6.53, 7.09, 7.42), 7.79),
    "paper-k10": ((6.36, 6.9, 7.22, 7.39), 7.57),
    "paper-k1000": ((7.261, 7.269, 7.272, 7.274), 7.276),
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=10_000, help="deviation grid for the certificate")
    args = parser.parse_args()

    for name, (ref_b, ref_p) in REFERENCE.items():
        sc = load_preset(name).scenario
        res = find_equilibrium(sc)
        cert = verify_nash(res.breakpoints, sc, epsilon=1e-2, deviation_grid_size=args.grid)
        print(f"{name}: K={sc.lipschitz_K:g} iterations={res.iterations} certificate={'pass' if cert.passed else 'FAIL'}")
        print("  p_i      " + "  ".join(f"{b:8.4f}" for b in res.breakpoints) + f"   p* {res.clearing_price:.4f}")
        print("  reported " + "  ".join(f"{b:8.4f}" for b in ref_b) + f"   p* {ref_p:.4f}")
        print("  u_i      " + "  ".join(f"{u:8.3f}" for u in res.utilities))

    ex = load_preset("example1")
    lhs, rhs = increasing_differences_sides(ex.scenario, 0, Quadruple(50.0, 50.2, (0.0,), (1.0,)))
    print(f"example1: lhs={lhs:.5f} rhs={rhs:.5f} violation={lhs < rhs}")


if __name__ == "__main__":
    main()
