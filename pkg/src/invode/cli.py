"""Command-line surface: prepare, solve, experiment, emit, verify, dump.

Exit codes: 0 ok, 1 I/O or input error, 2 dimension mismatch, 3 ill-posed
problem, 4 dependent or inconsistent constraints, 5 missing C toolchain.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import artifact, codegen, reference, specfile
from .constraints import check_well_posed, compile_constraints, compute_basis
from .expressions import eval_vector
from .errors import (
    DependentConstraints,
    DimensionMismatch,
    InconsistentConstraints,
    InvalidMeasurement,
    ToolkitError,
    Underconstrained,
)
from .operators import assemble_operator
from .solver import prepare, propagate_covariance, residual, solve
from .stats import confidence_interval, ks_gaussian_test
from .stencils import NodeGrid, build_diff_matrix

EXIT_OK = 0
EXIT_IO = 1
EXIT_DIMENSION = 2
EXIT_ILL_POSED = 3
EXIT_CONSTRAINTS = 4
EXIT_TOOLCHAIN = 5


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _build_pipeline(spec: specfile.ProblemSpec):
    op = assemble_operator(spec.ode, spec.grid, spec.support_length)
    cs = compile_constraints(spec.grid, spec.constraints, spec.support_length)
    return op, cs


def cmd_prepare(args) -> int:
    try:
        spec = specfile.load(args.spec)
    except (OSError, specfile.SpecError) as exc:
        return _fail(EXIT_IO, str(exc))
    try:
        op, cs = _build_pipeline(spec)
    except (DependentConstraints, InconsistentConstraints) as exc:
        return _fail(EXIT_CONSTRAINTS, str(exc))
    except ToolkitError as exc:
        return _fail(EXIT_IO, str(exc))

    report = check_well_posed(op, cs)
    print(f"stacked rank: {report.stacked_rank} of {report.n}")
    print(f"smallest relevant singular value: {report.smallest_relevant_sv:.6e}")
    print(f"null(L F) dimension: {report.lf_nullity}")
    if not report.well_posed or report.lf_nullity:
        return _fail(EXIT_ILL_POSED,
                     f"problem is not well posed "
                     f"(rank deficiency {report.n - report.stacked_rank})")
    try:
        ps = prepare(op, compute_basis(cs))
    except Underconstrained as exc:
        return _fail(EXIT_ILL_POSED, str(exc))
    artifact.save(ps, args.out)
    print(f"wrote artifact: {args.out} (n={ps.n})")
    return EXIT_OK


def _parse_ci(text: str) -> tuple[float, int]:
    level_s, _, dof_s = text.partition(":")
    level = float(level_s)
    dof = int(dof_s) if dof_s else 0
    if not 0 < level < 1 or dof < 1:
        raise ValueError(f"bad --ci {text!r}, expected LEVEL:DOF")
    return level, dof


def cmd_solve(args) -> int:
    try:
        ps = artifact.load(args.artifact)
    except (OSError, ValueError) as exc:
        return _fail(EXIT_IO, str(exc))

    op = None
    if args.with_operator:
        try:
            spec = specfile.load(args.with_operator)
            op, _ = _build_pipeline(spec)
        except (OSError, specfile.SpecError, ToolkitError) as exc:
            return _fail(EXIT_IO, str(exc))
        if op.digest != ps.meta.get("operator_digest"):
            return _fail(EXIT_IO,
                         "operator from spec does not match the artifact")

    ci = None
    if args.ci:
        try:
            ci = _parse_ci(args.ci)
        except ValueError as exc:
            return _fail(EXIT_IO, str(exc))

    n = ps.n
    sigma = args.sigma_g
    header = [f"y_{i}" for i in range(n)]
    if sigma is not None:
        header += [f"sigma_{i}" for i in range(n)]
        if ci is not None:
            header += [f"ci_{i}" for i in range(n)]
    if op is not None:
        header += ["resid_2norm", "ks_stat", "ks_reject"]

    try:
        fin = open(args.measurements, newline="", encoding="utf-8")
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    out_path = Path(args.out)
    try:
        with fin, open(out_path, "w", newline="", encoding="utf-8") as fout:
            writer = csv.writer(fout)
            writer.writerow(header)
            reader = csv.reader(fin)
            for row_idx, row in enumerate(reader):
                cells = [c for c in row if c.strip()]
                if not cells:
                    continue
                if row_idx == 0 and any(
                        c.strip().lstrip("-+.").lower().startswith(("y", "g", "s"))
                        for c in cells):
                    continue  # header row
                try:
                    g = np.array([float(c) for c in cells])
                except ValueError as exc:
                    return _fail(EXIT_IO, f"row {row_idx}: {exc}")
                if g.size != n:
                    return _fail(EXIT_DIMENSION,
                                 f"row {row_idx} has {g.size} values, expected {n}")
                try:
                    y = solve(ps, g)
                except (DimensionMismatch, InvalidMeasurement) as exc:
                    return _fail(EXIT_DIMENSION, f"row {row_idx}: {exc}")
                out_vals = [format(v, ".17g") for v in y]
                if sigma is not None:
                    sig = propagate_covariance(ps, sigma)
                    out_vals += [format(v, ".17g") for v in sig]
                    if ci is not None:
                        half = confidence_interval(sig, ci[1], ci[0])
                        out_vals += [format(v, ".17g") for v in half]
                if op is not None:
                    eps = residual(ps, op, g)
                    out_vals.append(format(float(np.linalg.norm(eps)), ".17g"))
                    try:
                        ks = ks_gaussian_test(eps, args.alpha)
                        out_vals += [format(ks.statistic, ".17g"),
                                     "1" if ks.reject else "0"]
                    except ToolkitError:
                        out_vals += ["nan", "0"]
                writer.writerow(out_vals)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    return EXIT_OK


def _write_reports(out_dir: Path, name: str, doc: dict, table: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"experiment_{name}.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out_dir / f"experiment_{name}.txt").write_text(table, encoding="utf-8")
    print(table, end="")


def _accuracy_experiment(name: str, args) -> int:
    tp = reference.problems()[name]
    rep = reference.run_test_problem(tp, n=args.n, ls=args.ls)

    # baseline: adaptive 5(4) pair on the same problem, plus kernel timing
    sys_ = reference.FirstOrderSystem.from_ode(tp.ode, tp.constraints)
    t0 = time.perf_counter()
    nodes, states = reference.rk45_solve(sys_, tp.ode.interval, 1e-3, 1e-6)
    rk_time = time.perf_counter() - t0
    ya_rk = eval_vector(tp.analytic, NodeGrid(nodes))
    rk_err = float(np.linalg.norm(states[:, 0] - ya_rk))

    ps, grid, g, _ = reference.prepare_problem(tp, n=args.n, ls=args.ls,
                                               grid_mode=rep.grid_mode)
    k = 10_000
    t0 = time.perf_counter()
    for _ in range(k):
        solve(ps, g)
    kernel_time = time.perf_counter() - t0

    table = (
        f"problem {name}: n={rep.n} l_s={rep.ls} grid={rep.grid_mode}\n"
        f"{'method':<12s} {'error 2-norm':>14s} {'time (k=10000)':>16s}\n"
        f"{'rk45':<12s} {rk_err:>14.4e} {rk_time * k:>15.4f}s\n"
        f"{'prepared':<12s} {rep.error_2norm:>14.4e} {kernel_time:>15.4f}s\n"
    )
    doc = {
        "problem": name, "n": rep.n, "ls": rep.ls, "grid_mode": rep.grid_mode,
        "error_2norm": rep.error_2norm, "relative_error": rep.relative_error,
        "prepare_seconds": rep.timing["prepare_s"],
        "kernel_seconds_per_solve": kernel_time / k,
        "rk45_error_2norm": rk_err, "rk45_nodes": int(nodes.size),
        "rk45_seconds_per_solve": rk_time,
        "error_vector": [float(v) for v in rep.error_vector],
    }
    _write_reports(Path(args.out_dir), name, doc, table)
    return EXIT_OK


def _sweep_experiment(args) -> int:
    tp = reference.problems()[args.problem]
    sweep = reference.support_sweep(tp, n=args.n)
    best = min(sweep, key=lambda t: t[1])
    lines = [f"support sweep: problem={args.problem} n={args.n or tp.default_n}",
             f"{'l_s':>4s} {'relative error':>16s}"]
    lines += [f"{ls:>4d} {err:>16.6e}" for ls, err in sweep]
    lines.append(f"minimum at l_s={best[0]} (relative error {best[1]:.6e})")
    doc = {"problem": args.problem, "n": args.n or tp.default_n,
           "sweep": [{"ls": ls, "relative_error": err} for ls, err in sweep],
           "argmin_ls": best[0], "min_relative_error": best[1]}
    _write_reports(Path(args.out_dir), "sweep", doc, "\n".join(lines) + "\n")
    return EXIT_OK


def _montecarlo_experiment(args) -> int:
    tp = reference.problems()[args.problem]
    mc = reference.monte_carlo(tp, n=args.n, ls=args.ls, sigma=args.sigma,
                               k=args.k, seed=args.seed)
    live = mc.predicted_sigma > 1e-12 * np.max(mc.predicted_sigma)
    dev = np.abs(mc.sample_sigma - mc.predicted_sigma)[live]
    rel = float(np.max(dev / mc.predicted_sigma[live]))
    table = (
        f"monte carlo: problem={args.problem} k={mc.iterations} seed={mc.seed} "
        f"sigma_g={mc.sigma_g:.6e}\n"
        f"max |bias|: {float(np.max(np.abs(mc.bias))):.6e}\n"
        f"max sigma deviation (relative, fully pinned nodes excluded): "
        f"{rel:.4%}\n"
    )
    doc = {"problem": args.problem, "k": mc.iterations, "seed": mc.seed,
           "sigma_g": mc.sigma_g,
           "bias": [float(v) for v in mc.bias],
           "sample_sigma": [float(v) for v in mc.sample_sigma],
           "predicted_sigma": [float(v) for v in mc.predicted_sigma]}
    _write_reports(Path(args.out_dir), "montecarlo", doc, table)
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        if args.name in ("testA", "testB", "testC"):
            return _accuracy_experiment(args.name, args)
        if args.name == "sweep":
            return _sweep_experiment(args)
        if args.name == "montecarlo":
            return _montecarlo_experiment(args)
    except ToolkitError as exc:
        return _fail(EXIT_IO, str(exc))
    return _fail(EXIT_IO, f"unknown experiment {args.name!r}")


def cmd_emit(args) -> int:
    try:
        ps = artifact.load(args.artifact)
    except (OSError, ValueError) as exc:
        return _fail(EXIT_IO, str(exc))
    try:
        cfg = codegen.EmitConfig(precision=args.precision,
                                 symbol_prefix=args.prefix,
                                 use_mac=not args.no_mac,
                                 emit_sigma=not args.no_sigma)
    except ToolkitError as exc:
        return _fail(EXIT_IO, str(exc))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rendered = codegen.emit_c(ps, cfg)
    (out_dir / f"{cfg.symbol_prefix}_solver.h").write_text(
        rendered["header"], encoding="utf-8")
    (out_dir / f"{cfg.symbol_prefix}_solver.c").write_text(
        rendered["source"], encoding="utf-8")
    (out_dir / f"{cfg.symbol_prefix}_harness.c").write_text(
        codegen.emit_harness(cfg), encoding="utf-8")
    tvs = codegen.emit_test_vectors(ps, count=args.vectors, seed=args.seed)
    (out_dir / "vectors.csv").write_text(codegen.vectors_csv(tvs),
                                         encoding="utf-8")
    meta = {"prefix": cfg.symbol_prefix, "precision": cfg.precision,
            "n": ps.n, "tolerances": tvs.tolerances,
            "operator_digest": ps.meta.get("operator_digest"),
            "expected_sigma": [format(v, ".17g") for v in tvs.expected_sigma]}
    (out_dir / "vectors_meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"emitted {cfg.precision} kernel '{cfg.symbol_prefix}' "
          f"(n={ps.n}) into {out_dir}")
    return EXIT_OK


def find_compiler() -> str | None:
    cc = os.environ.get("CC")
    if cc and shutil.which(cc):
        return cc
    for candidate in ("cc", "gcc", "clang"):
        if shutil.which(candidate):
            return candidate
    return None


def compare_outputs(out_csv: Path, vectors_csv_path: Path, n: int,
                    tol_rel: float) -> tuple[float, float, bool]:
    """Compare harness outputs with expectations embedded in the vector file.

    Returns (max elementwise delta, 2-norm of all deltas, within tolerance).
    """
    got = np.loadtxt(out_csv, delimiter=",", skiprows=1, ndmin=2)
    full = np.loadtxt(vectors_csv_path, delimiter=",", skiprows=1, ndmin=2)
    expected = full[:, n:]
    if got.shape != expected.shape:
        raise DimensionMismatch(
            f"harness produced {got.shape}, expected {expected.shape}")
    delta = np.abs(got - expected)
    max_delta = float(np.max(delta))
    norm = float(np.linalg.norm(delta))
    bound = tol_rel * np.maximum(1.0, np.abs(expected))
    return max_delta, norm, bool(np.all(delta <= bound))


def cmd_verify(args) -> int:
    kernel_dir = Path(args.kernel_dir)
    try:
        meta = json.loads((kernel_dir / "vectors_meta.json").read_text())
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read vectors_meta.json: {exc}")
    prefix = meta["prefix"]
    precision = meta["precision"]
    n = int(meta["n"])

    if args.artifact:
        try:
            ps = artifact.load(args.artifact)
        except (OSError, ValueError) as exc:
            return _fail(EXIT_IO, str(exc))
        if ps.meta.get("operator_digest") != meta.get("operator_digest"):
            return _fail(EXIT_IO, "kernel was emitted from a different artifact")
        if ps.n != n:
            return _fail(EXIT_DIMENSION, "artifact dimension mismatch")

    cc = find_compiler()
    if cc is None:
        return _fail(EXIT_TOOLCHAIN, "no C compiler found (set $CC)")

    exe = kernel_dir / f"{prefix}_harness"
    compile_cmd = [cc, "-std=c99", "-O2", "-Wall", "-Wextra", "-Werror",
                   str(kernel_dir / f"{prefix}_solver.c"),
                   str(kernel_dir / f"{prefix}_harness.c"),
                   "-o", str(exe)]
    proc = subprocess.run(compile_cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        return _fail(EXIT_TOOLCHAIN, f"compilation failed:\n{proc.stderr}")

    out_csv = kernel_dir / "harness_out.csv"
    run_cmd = [str(exe), str(kernel_dir / "vectors.csv"), str(out_csv)]
    if args.bench:
        run_cmd += ["--bench", str(args.bench)]
    proc = subprocess.run(run_cmd, capture_output=True, text=True)
    if proc.stderr:
        print(proc.stderr, end="", file=sys.stderr)
    if proc.returncode != 0:
        return _fail(EXIT_IO, f"harness exited with {proc.returncode}")

    tol = meta["tolerances"][precision]
    try:
        max_delta, norm, ok = compare_outputs(
            out_csv, kernel_dir / "vectors.csv", n, tol)
    except DimensionMismatch as exc:
        return _fail(EXIT_DIMENSION, str(exc))
    print(f"kernel '{prefix}' ({precision}): max|delta| = {max_delta:.6e}, "
          f"||delta||_2 = {norm:.6e}")
    if not ok:
        return _fail(EXIT_IO,
                     f"outputs exceed the {precision} tolerance ({tol:g} "
                     "relative to max(1, |y|))")
    print("verification passed")
    return EXIT_OK


def cmd_dump(args) -> int:
    try:
        spec = specfile.load(args.spec)
    except (OSError, specfile.SpecError) as exc:
        return _fail(EXIT_IO, str(exc))
    try:
        if args.what == "operator":
            matrix = assemble_operator(spec.ode, spec.grid,
                                       spec.support_length).entries
        else:
            matrix = build_diff_matrix(spec.grid, args.order,
                                       spec.support_length).entries
    except ToolkitError as exc:
        return _fail(EXIT_IO, str(exc))
    lines = [" ".join(format(v, ".17g") for v in row) for row in matrix]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invode",
        description="Precompiled real-time solvers for constrained linear "
                    "ODE inverse problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="compile a problem spec into an artifact")
    p.add_argument("spec")
    p.add_argument("out")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("solve", help="solve measurement rows with an artifact")
    p.add_argument("artifact")
    p.add_argument("measurements")
    p.add_argument("out")
    p.add_argument("--sigma-g", type=float, default=None)
    p.add_argument("--ci", default=None, metavar="LEVEL:DOF")
    p.add_argument("--with-operator", default=None, metavar="SPEC",
                   help="recompute the operator for residual diagnostics")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", help="run a benchmark study")
    p.add_argument("name",
                   choices=["testA", "testB", "testC", "sweep", "montecarlo"])
    p.add_argument("--problem", default="testC")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--ls", type=int, default=None)
    p.add_argument("--k", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("emit", help="emit a C99 kernel from an artifact")
    p.add_argument("artifact")
    p.add_argument("--out-dir", default="kernel")
    p.add_argument("--precision", choices=["double", "single"],
                   default="double")
    p.add_argument("--prefix", default="kernel")
    p.add_argument("--no-mac", action="store_true",
                   help="emit separate multiply and add statements")
    p.add_argument("--no-sigma", action="store_true")
    p.add_argument("--vectors", type=int, default=16)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("verify", help="compile, run and check an emitted kernel")
    p.add_argument("kernel_dir")
    p.add_argument("artifact", nargs="?", default=None)
    p.add_argument("--bench", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dump", help="print a matrix as decimal text")
    p.add_argument("spec")
    p.add_argument("--what", choices=["operator", "diff"], default="operator")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dump)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
