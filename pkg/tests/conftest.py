import numpy as np
import pytest

import invode as iv
from invode._linalg import frozen
from invode.solver import PreparedSolver


@pytest.fixture(scope="session")
def problems():
    return iv.problems()


@pytest.fixture(scope="session")
def prepared_test_e(problems):
    ps, grid, g, ya = iv.reference.prepare_problem(problems["testE"])
    return ps, grid, g, ya


def synthetic_prepared(M, y_h=None, lo=0.0, hi=1.0) -> PreparedSolver:
    """PreparedSolver built directly from a matrix (bypasses the pipeline)."""
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    y_h = np.zeros(n) if y_h is None else np.asarray(y_h, dtype=np.float64)
    return PreparedSolver(M=frozen(M), y_h=frozen(y_h),
                          s=frozen(np.sqrt((M * M).sum(axis=1))),
                          grid=iv.NodeGrid.uniform(n, lo, hi),
                          meta={"n": n, "operator_digest": "synthetic",
                                "constraint_digest": "synthetic"})


def random_grid(rng, n, lo=0.0, scale=1.0, min_gap=0.01):
    """Strictly increasing nodes with log-uniform gaps in [min_gap, 1]*scale."""
    gaps = np.exp(rng.uniform(np.log(min_gap), 0.0, n - 1)) * scale
    return iv.NodeGrid(lo + np.concatenate([[0.0], np.cumsum(gaps)]))


def random_well_posed_system(rng, n_max=15, max_cond=1e4):
    """Random small constrained system for oracle comparisons.

    Draws until the stacked system is well posed and L F is well enough
    conditioned that dense normal equations on beta remain a valid oracle
    (kappa^2 * eps well below the comparison tolerance).
    """
    while True:
        n = int(rng.integers(7, n_max + 1))
        m = int(rng.integers(1, 3))
        ls = int(rng.choice([l for l in (3, 5, 7) if m < l <= n]))
        grid = random_grid(rng, n, scale=float(rng.uniform(0.5, 2.0)),
                           min_gap=0.2)
        coeffs = [format(v, ".6g") for v in rng.uniform(-2.0, 2.0, m + 1)]
        lead = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        coeffs[-1] = format(lead, ".6g")
        spec = iv.OdeSpec.from_strings(m, coeffs, grid.span)
        try:
            op = iv.assemble_operator(spec, grid, ls)
        except iv.ToolkitError:
            continue
        p = m + int(rng.integers(0, 3))
        cons = []
        for _ in range(p):
            order = int(rng.integers(0, min(m + 1, ls)))
            loc = float(rng.uniform(grid.x[0], grid.x[-1]))
            cons.append(iv.Constraint(order, loc, float(rng.uniform(-2, 2))))
        try:
            cs = iv.compile_constraints(grid, cons, ls)
        except iv.ToolkitError:
            continue
        report = iv.check_well_posed(op, cs)
        if not report.well_posed or report.lf_nullity:
            continue
        basis = iv.compute_basis(cs)
        lf = op.entries @ basis.F
        sv = np.linalg.svd(lf, compute_uv=False)
        if sv[0] / sv[-1] > max_cond:
            continue
        return op, cs, basis
