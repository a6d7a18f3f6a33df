"""Dependency-free C99 kernel emission for prepared solvers.

The kernel pair (<prefix>_solver.h / .c) embeds M, y_h and optionally s as
static constant arrays and exposes reentrant solve / sigma routines with no
heap use, no I/O and no includes beyond freestanding headers. A matching
self-contained harness (hosted C, CSV in / CSV out) and a seeded test-vector
file round out one emission, so a conformance run needs nothing but a C
compiler. Emission is a pure function of (artifact, config): byte-identical
inputs give byte-identical text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidIdentifier
from .solver import PreparedSolver, solve

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# per-precision element tolerances for conformance checks, relative to
# max(1, |expected|); double covers accumulation-order differences only
TOLERANCES = {"double": 1e-12, "single": 2e-5}


@dataclass(frozen=True)
class EmitConfig:
    precision: str = "double"  # "double" | "single"
    symbol_prefix: str = "kernel"
    use_mac: bool = True
    emit_sigma: bool = True

    def __post_init__(self):
        if self.precision not in ("double", "single"):
            raise ValueError(f"precision must be double or single, "
                             f"got {self.precision!r}")
        if not _IDENT_RE.match(self.symbol_prefix):
            raise InvalidIdentifier(
                f"{self.symbol_prefix!r} is not a valid C identifier")


@dataclass(frozen=True)
class TestVectorSet:
    """Seeded inputs with primary-solver expectations and tolerances."""

    g: np.ndarray          # (count, n)
    expected_y: np.ndarray  # (count, n), double-precision primary results
    expected_sigma: np.ndarray  # (n,) for sigma_g = 1
    tolerances: dict


def _format_value(v: float, precision: str) -> str:
    if precision == "single":
        text = format(float(np.float32(v)), ".9g")
    else:
        text = format(float(v), ".17g")
    if not any(c in text for c in ".eE"):
        text += ".0"  # keep the literal a floating constant
    return text + "f" if precision == "single" else text


def _format_array(values, precision: str, per_line: int = 4) -> str:
    items = [_format_value(v, precision) for v in np.asarray(values).ravel()]
    lines = []
    for i in range(0, len(items), per_line):
        lines.append("    " + ", ".join(items[i:i + per_line]) + ",")
    text = "\n".join(lines)
    return text[:-1] if text.endswith(",") else text


def emit_c(ps: PreparedSolver, cfg: EmitConfig) -> dict[str, str]:
    """Render the kernel header and source. Returns {"header":..., "source":...}."""
    n = ps.n
    pre = cfg.symbol_prefix
    up = pre.upper()
    real = "double" if cfg.precision == "double" else "float"

    header_lines = [
        f"/* {pre}_solver.h */",
        f"/* Precomputed linear inverse-problem kernel, n = {n}, "
        f"{cfg.precision} precision. */",
        "/* Solves y = M g + y_h with a fixed row-major accumulation order. */",
        f"#ifndef {up}_SOLVER_H",
        f"#define {up}_SOLVER_H",
        "",
        f"#define {up}_N {n}",
        f"typedef {real} {pre}_real;",
        "",
        "#ifdef __cplusplus",
        'extern "C" {',
        "#endif",
        "",
        f"/* y[i] = sum_j M[i][j] g[j] + y_h[i]; g and y must not alias. */",
        f"void {pre}_solve(const {pre}_real *g, {pre}_real *y);",
    ]
    if cfg.emit_sigma:
        header_lines += [
            "",
            f"/* sigma_y[i] = sigma_g * s[i] (per-node standard deviation). */",
            f"void {pre}_sigma({pre}_real sigma_g, {pre}_real *sigma_y);",
        ]
    header_lines += [
        "",
        "#ifdef __cplusplus",
        "}",
        "#endif",
        "",
        f"#endif /* {up}_SOLVER_H */",
        "",
    ]

    src = [
        f"/* {pre}_solver.c (generated; do not edit) */",
        f'#include "{pre}_solver.h"',
        "",
        f"static const {pre}_real {up}_M[{up}_N * {up}_N] = {{",
        _format_array(ps.M, cfg.precision),
        "};",
        "",
        f"static const {pre}_real {up}_YH[{up}_N] = {{",
        _format_array(ps.y_h, cfg.precision),
        "};",
        "",
    ]
    if cfg.emit_sigma:
        src += [
            f"static const {pre}_real {up}_S[{up}_N] = {{",
            _format_array(ps.s, cfg.precision),
            "};",
            "",
        ]
    src += [
        f"void {pre}_solve(const {pre}_real *g, {pre}_real *y)",
        "{",
        "    int r, c;",
        f"    for (r = 0; r < {up}_N; ++r) {{",
        f"        {pre}_real acc = ({pre}_real)0;",
    ]
    if cfg.use_mac:
        src += [
            f"        for (c = 0; c < {up}_N; ++c) {{",
            f"            acc += {up}_M[(long)r * {up}_N + c] * g[c];",
            "        }",
        ]
    else:
        src += [
            f"        for (c = 0; c < {up}_N; ++c) {{",
            f"            {pre}_real prod = {up}_M[(long)r * {up}_N + c] * g[c];",
            "            acc = acc + prod;",
            "        }",
        ]
    src += [
        f"        y[r] = acc + {up}_YH[r];",
        "    }",
        "}",
    ]
    if cfg.emit_sigma:
        src += [
            "",
            f"void {pre}_sigma({pre}_real sigma_g, {pre}_real *sigma_y)",
            "{",
            "    int i;",
            f"    for (i = 0; i < {up}_N; ++i) {{",
            f"        sigma_y[i] = sigma_g * {up}_S[i];",
            "    }",
            "}",
        ]
    src.append("")
    return {"header": "\n".join(header_lines), "source": "\n".join(src)}


def emit_harness(cfg: EmitConfig) -> str:
    """Hosted conformance harness: CSV rows of g in, CSV rows of y out.

    usage: harness <vectors.csv> <out.csv> [--bench k]
    Rows may carry n values (inputs only) or 2n values (inputs with expected
    outputs appended); only the first n are consumed. Exit codes: 0 success,
    1 file or parse failure, 2 dimension mismatch.
    """
    pre = cfg.symbol_prefix
    up = pre.upper()
    out_fmt = "%.17g" if cfg.precision == "double" else "%.9g"
    return f'''/* {pre}_harness.c (generated; do not edit) */
#define _POSIX_C_SOURCE 199309L
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <time.h>
#include "{pre}_solver.h"

#define LINE_MAX_LEN 1048576

static int parse_row(char *line, {pre}_real *g)
{{
    int count = 0;
    char *tok = strtok(line, ",\\n\\r");
    while (tok != NULL) {{
        char *end = NULL;
        double v;
        while (*tok == ' ' || *tok == '\\t') {{
            ++tok;
        }}
        if (*tok == '\\0') {{
            tok = strtok(NULL, ",\\n\\r");
            continue;
        }}
        v = strtod(tok, &end);
        if (end == tok) {{
            return -1;
        }}
        if (count < {up}_N) {{
            g[count] = ({pre}_real)v;
        }}
        ++count;
        tok = strtok(NULL, ",\\n\\r");
    }}
    return count;
}}

static int looks_like_header(const char *line)
{{
    while (*line == ' ' || *line == '\\t') {{
        ++line;
    }}
    return (*line >= 'a' && *line <= 'z') || (*line >= 'A' && *line <= 'Z');
}}

int main(int argc, char **argv)
{{
    static char line[LINE_MAX_LEN];
    static {pre}_real g[{up}_N];
    static {pre}_real y[{up}_N];
    FILE *in, *out;
    long bench = 0;
    long row = 0;
    long data_rows = 0;
    int i;

    if (argc < 3) {{
        fprintf(stderr, "usage: %s <vectors.csv> <out.csv> [--bench k]\\n", argv[0]);
        return 1;
    }}
    if (argc >= 5 && strcmp(argv[3], "--bench") == 0) {{
        bench = strtol(argv[4], NULL, 10);
    }}
    in = fopen(argv[1], "r");
    if (in == NULL) {{
        fprintf(stderr, "cannot open %s\\n", argv[1]);
        return 1;
    }}
    out = fopen(argv[2], "w");
    if (out == NULL) {{
        fclose(in);
        fprintf(stderr, "cannot open %s\\n", argv[2]);
        return 1;
    }}
    fprintf(out, "y_0");
    for (i = 1; i < {up}_N; ++i) {{
        fprintf(out, ",y_%d", i);
    }}
    fprintf(out, "\\n");

    while (fgets(line, sizeof line, in) != NULL) {{
        int count;
        if (row == 0 && looks_like_header(line)) {{
            ++row;
            continue;
        }}
        if (line[0] == '\\n' || line[0] == '\\0') {{
            continue;
        }}
        count = parse_row(line, g);
        if (count < 0) {{
            fclose(in);
            fclose(out);
            fprintf(stderr, "parse failure at row %ld\\n", row);
            return 1;
        }}
        if (count != {up}_N && count != 2 * {up}_N) {{
            fclose(in);
            fclose(out);
            fprintf(stderr, "row %ld has %d values, expected %d or %d\\n",
                    row, count, {up}_N, 2 * {up}_N);
            return 2;
        }}
        {pre}_solve(g, y);
        for (i = 0; i < {up}_N; ++i) {{
            fprintf(out, i ? ",{out_fmt}" : "{out_fmt}", (double)y[i]);
        }}
        fprintf(out, "\\n");
        ++row;
        ++data_rows;

        if (bench > 0 && data_rows == 1) {{
            volatile {pre}_real sink = 0;
            struct timespec a, b;
            long it;
            double ns;
            clock_gettime(CLOCK_MONOTONIC, &a);
            for (it = 0; it < bench; ++it) {{
                {pre}_solve(g, y);
                sink += y[0];
            }}
            clock_gettime(CLOCK_MONOTONIC, &b);
            ns = (double)(b.tv_sec - a.tv_sec) * 1e9 + (double)(b.tv_nsec - a.tv_nsec);
            fprintf(stderr, "bench: %ld solves, %.1f ns/solve\\n", bench, ns / (double)bench);
            (void)sink;
        }}
    }}
    fclose(in);
    fclose(out);
    return 0;
}}
'''


def emit_test_vectors(ps: PreparedSolver, count: int, seed: int,
                      extra_inputs=None) -> TestVectorSet:
    """Seeded random inputs plus optional caller-supplied rows.

    Expectations come from the primary double-precision solver, so the set
    doubles as the software-in-the-loop equivalence oracle.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    n = ps.n
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.max(np.abs(ps.y_h))))
    rows = [rng.standard_normal(n) * scale for _ in range(count)]
    if extra_inputs is not None:
        rows.extend(np.asarray(r, dtype=np.float64) for r in extra_inputs)
    g = np.vstack(rows)
    expected = np.vstack([solve(ps, row) for row in g])
    return TestVectorSet(g=g, expected_y=expected, expected_sigma=ps.s.copy(),
                         tolerances=dict(TOLERANCES))


def vectors_csv(tvs: TestVectorSet) -> str:
    """CSV text: header g_0..g_{n-1},y_0..y_{n-1}, one row per vector."""
    n = tvs.g.shape[1]
    header = ",".join([f"g_{i}" for i in range(n)] + [f"y_{i}" for i in range(n)])
    lines = [header]
    for g, y in zip(tvs.g, tvs.expected_y):
        vals = [format(v, ".17g") for v in g] + [format(v, ".17g") for v in y]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def parse_emitted_arrays(source: str, prefix: str) -> dict[str, np.ndarray]:
    """Read M, y_h (and s when present) back out of generated source text."""
    up = prefix.upper()
    out = {}
    for name, key in ((f"{up}_M", "M"), (f"{up}_YH", "y_h"), (f"{up}_S", "s")):
        m = re.search(name + r"\[[^\]]*\] = \{(.*?)\};", source, re.S)
        if m:
            body = m.group(1).replace("f", "")
            vals = [float(v) for v in re.split(r"[,\s]+", body.strip()) if v]
            out[key] = np.array(vals)
    return out
