"""Expected fraction of distinct rows in a bootstrap sample versus the rate.

Compares the finite-n value with its large-n limit ``1 - exp(-rate)``.
"""
import argparse

import numpy as np

from brforest.sampling import expected_distinct, expected_distinct_limit, oob_probability


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[10, 100, 1000])
    ap.add_argument("--rates", type=float, nargs="+",
                    default=[float(r) for r in np.round(np.arange(0.1, 5.01, 0.1), 2)] + [10.0])
    args = ap.parse_args(argv)

    print("n,rate,distinct_fraction,limit,oob_probability")
    for n in args.n:
        for rate in args.rates:
            print(f"{n},{rate:g},{expected_distinct(n, rate) / n:.6f},"
                  f"{expected_distinct_limit(rate):.6f},{oob_probability(n, rate):.6f}")


if __name__ == "__main__":
    main()
