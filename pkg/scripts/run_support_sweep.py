#!/usr/bin/env python3
"""Support-length sweep: relative solution error per odd l_s.

usage: run_support_sweep.py [--problem testC] [--n N] [--max-ls 25]
"""

import argparse
import math

import invode as iv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--problem", default="testC")
    ap.add_argument("--n", type=int, default=None)
    ap.add_argument("--max-ls", type=int, default=25)
    args = ap.parse_args()

    tp = iv.problems()[args.problem]
    sweep = iv.support_sweep(tp, n=args.n,
                             supports=range(3, args.max_ls + 1, 2))
    print(f"problem {args.problem}, n={args.n or tp.default_n}")
    print(f"{'l_s':>4s} {'rel error':>12s} {'log10':>7s}")
    for ls, err in sweep:
        print(f"{ls:>4d} {err:>12.4e} {math.log10(err):>7.2f}")
    best = min(sweep, key=lambda t: t[1])
    print(f"minimum: l_s={best[0]} with relative error {best[1]:.4e}")


if __name__ == "__main__":
    main()
