#!/usr/bin/env python3
"""Monte Carlo noise study: bias and predicted-vs-sampled uncertainty.

usage: run_monte_carlo.py [--problem testE] [--k 10000] [--seed 1]
"""

import argparse

import numpy as np

import invode as iv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--problem", default="testE")
    ap.add_argument("--k", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--sigma", type=float, default=None,
                    help="noise std; defaults to 1%% of the peak forcing")
    args = ap.parse_args()

    tp = iv.problems()[args.problem]
    mc = iv.monte_carlo(tp, sigma=args.sigma, k=args.k, seed=args.seed)
    print(f"problem {args.problem}: k={mc.iterations} seed={mc.seed} "
          f"sigma_g={mc.sigma_g:.6e}")
    print(f"{'node':>5s} {'bias':>12s} {'sigma (MC)':>12s} {'sigma (P)':>12s}")
    grid = tp.build_grid()
    for i in range(mc.bias.size):
        print(f"{grid.x[i]:>5.2f} {mc.bias[i]:>12.3e} "
              f"{mc.sample_sigma[i]:>12.4e} {mc.predicted_sigma[i]:>12.4e}")
    print(f"max |bias|: {np.max(np.abs(mc.bias)):.3e}")
    live = mc.predicted_sigma > 1e-12 * np.max(mc.predicted_sigma)
    dev = np.abs(mc.sample_sigma - mc.predicted_sigma)[live]
    print(f"max relative sigma deviation: "
          f"{np.max(dev / mc.predicted_sigma[live]):.3%}"
          + ("" if live.all() else " (fully pinned nodes excluded)"))


if __name__ == "__main__":
    main()
