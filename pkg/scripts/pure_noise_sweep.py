"""Test MSE of a 100-tree forest on pure-noise data across bootstrap rates.

Prints CSV rows ``sigma,br,mean_mse,ratio_to_sigma2,se``. The mean predictor
scores sigma^2 and a single-neighbour predictor 2 sigma^2.
"""
import argparse
import sys

import numpy as np

from brforest.forest import fit_forest, preset
from brforest.synthetic import PURE_NOISE_SIGMAS, NoiseSpec, gen_pure_noise

RATES = (0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 2.0, 3.0, 4.0, 5.0, 10.0)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigmas", type=float, nargs="+", default=list(PURE_NOISE_SIGMAS))
    ap.add_argument("--rates", type=float, nargs="+", default=list(RATES))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    out = sys.stdout
    out.write("sigma,br,mean_mse,ratio_to_sigma2,se\n")
    for i, sigma in enumerate(args.sigmas):
        spec = NoiseSpec(sigma=sigma, n=args.n)
        for rate in args.rates:
            mses = []
            for s in range(args.seeds):
                seed = 100 * i + s
                train, test = gen_pure_noise(spec, seed), gen_pure_noise(spec, seed, draw=1)
                forest = fit_forest(train, preset("RF[100]", rate, seed), threads=args.threads)
                mses.append(np.mean((forest.predict(test.X) - test.y) ** 2))
            m = float(np.mean(mses))
            se = float(np.std(mses, ddof=1) / np.sqrt(len(mses))) if len(mses) > 1 else float("nan")
            out.write(f"{sigma:g},{rate:g},{m:.6f},{m / sigma ** 2:.6f},{se:.6f}\n")
            out.flush()


if __name__ == "__main__":
    main()
