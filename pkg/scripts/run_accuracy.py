#!/usr/bin/env python3
"""Accuracy study: prepared solver vs the adaptive 5(4) baseline.

usage: run_accuracy.py [testA|testB|testC] [--n N] [--ls L]
"""

import argparse
import time

import numpy as np

import invode as iv
from invode.reference import FirstOrderSystem


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("problem", nargs="?", default="testA",
                    choices=["testA", "testB", "testC", "testA_pil"])
    ap.add_argument("--n", type=int, default=None)
    ap.add_argument("--ls", type=int, default=None)
    ap.add_argument("--repeats", type=int, default=10_000)
    args = ap.parse_args()

    tp = iv.problems()[args.problem]
    rep = iv.run_test_problem(tp, n=args.n, ls=args.ls)

    sys_ = FirstOrderSystem.from_ode(tp.ode, tp.constraints)
    t0 = time.perf_counter()
    nodes, states = iv.rk45_solve(sys_, tp.ode.interval, 1e-3, 1e-6)
    rk_elapsed = time.perf_counter() - t0
    ya = iv.eval_vector(tp.analytic, iv.NodeGrid(nodes))
    rk_err = float(np.linalg.norm(states[:, 0] - ya))

    ps, grid, g, _ = iv.reference.prepare_problem(tp, n=args.n, ls=args.ls,
                                                  grid_mode=rep.grid_mode)
    t0 = time.perf_counter()
    for _ in range(args.repeats):
        iv.solve(ps, g)
    kernel_elapsed = time.perf_counter() - t0

    print(f"problem {rep.name}: n={rep.n} l_s={rep.ls} grid={rep.grid_mode}")
    print(f"{'method':<10s} {'error 2-norm':>14s} {'time k=' + str(args.repeats):>18s}")
    print(f"{'rk45':<10s} {rk_err:>14.4e} {rk_elapsed * args.repeats:>17.3f}s")
    print(f"{'prepared':<10s} {rep.error_2norm:>14.4e} {kernel_elapsed:>17.3f}s")
    print(f"speedup per solve: {rk_elapsed * args.repeats / kernel_elapsed:.0f}x")


if __name__ == "__main__":
    main()
