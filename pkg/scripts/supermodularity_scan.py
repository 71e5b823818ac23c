"""Count increasing-differences violations on random quadruples, overall and inside the fixed-active-set region."""

import argparse

from pab_sfe.analysis import in_stable_region, increasing_differences_check, random_quadruples
from pab_sfe.scenario_io import load_preset


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", default="paper-k5")
    parser.add_argument("--samples", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    sc = load_preset(args.preset).scenario
    print(f"{'firm':>4} {'tested':>7} {'violations':>10} {'stable':>7} {'stable viol.':>12}")
    for i in range(sc.n_firms):
        sample = random_quadruples(sc, i, args.samples, seed=args.seed + i)
        stable = [q for q in sample if in_stable_region(sc, i, q)]
        all_rep = increasing_differences_check(sc, i, sample)
        st_rep = increasing_differences_check(sc, i, stable)
        print(f"{i + 1:>4} {len(sample):>7} {len(all_rep.violations):>10} {len(stable):>7} {len(st_rep.violations):>12}")


if __name__ == "__main__":
    main()
