import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import invode as iv
from invode.errors import (
    ConstraintOutOfRange,
    DependentConstraints,
    InconsistentConstraints,
)

from conftest import random_grid


class TestCompile:
    def test_value_constraint_at_first_node(self):
        grid = iv.NodeGrid.uniform(8, 0, 1)
        cs = iv.compile_constraints(grid, [iv.Constraint(0, 0.0, 3.0)], 3)
        e1 = np.zeros(8)
        e1[0] = 1.0
        np.testing.assert_allclose(cs.C[:, 0], e1, atol=1e-12)
        assert cs.d[0] == 3.0

    def test_initial_value_columns_match_stencils(self):
        # order-0/1/2 constraints at the interval start on 77 synthesized nodes
        grid = iv.NodeGrid.uniform(77, 0, 8)
        cons = [iv.Constraint(0, 0.0, 3.0), iv.Constraint(1, 0.0, -3.0),
                iv.Constraint(2, 0.0, -47.0)]
        cs = iv.compile_constraints(grid, cons, 9)
        assert cs.C.shape == (77, 3)
        e1 = np.zeros(77)
        e1[0] = 1.0
        np.testing.assert_allclose(cs.C[:, 0], e1, atol=1e-12)
        w = iv.fd_weights(grid.x[:9], 0.0, 2)
        np.testing.assert_allclose(cs.C[:9, 1], w.order(1), atol=1e-12)
        np.testing.assert_allclose(cs.C[:9, 2], w.order(2), atol=1e-12)
        assert np.all(cs.C[9:, 1:] == 0.0)

    def test_duplicate_constraint_rejected(self):
        grid = iv.NodeGrid.uniform(6, 0, 1)
        cons = [iv.Constraint(0, 0.0, 3.0), iv.Constraint(0, 0.0, 3.0)]
        with pytest.raises(DependentConstraints):
            iv.compile_constraints(grid, cons, 3)

    def test_contradictory_constraints_rejected(self):
        grid = iv.NodeGrid.uniform(6, 0, 1)
        cons = [iv.Constraint(0, 0.0, 1.0), iv.Constraint(0, 0.0, 2.0)]
        with pytest.raises(InconsistentConstraints):
            iv.compile_constraints(grid, cons, 3)

    def test_location_outside_span_rejected(self):
        grid = iv.NodeGrid.uniform(6, 0, 1)
        with pytest.raises(ConstraintOutOfRange):
            iv.compile_constraints(grid, [iv.Constraint(0, 1.5, 0.0)], 3)

    def test_off_node_constraint_row_evaluates_polynomial(self):
        # order-0 row at an off-node location interpolates exactly
        grid = iv.NodeGrid.uniform(21, 0, 1)
        cs = iv.compile_constraints(grid, [iv.Constraint(0, 0.7895, 0.25)], 9)
        p = 3.0 * grid.x ** 4 - grid.x + 0.5
        want = 3.0 * 0.7895 ** 4 - 0.7895 + 0.5
        assert cs.C[:, 0] @ p == pytest.approx(want, abs=1e-12)


class TestBasis:
    def test_two_node_single_constraint(self):
        grid = iv.NodeGrid(np.array([0.0, 1.0]))
        cs = iv.compile_constraints(grid, [iv.Constraint(0, 0.0, 1.0)], 1)
        b = iv.compute_basis(cs)
        np.testing.assert_allclose(b.P[:, 0], [1.0, 0.0], atol=1e-14)
        np.testing.assert_allclose(np.abs(b.F[:, 0]), [0.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(b.H @ cs.d, [1.0, 0.0], atol=1e-14)

    def test_orthonormality_and_null_space(self, problems):
        tp = problems["testE"]
        grid = tp.build_grid()
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        b = iv.compute_basis(cs)
        n, p = 21, 4
        np.testing.assert_allclose(b.F.T @ b.F, np.eye(n - p), atol=1e-12)
        assert np.max(np.abs(cs.C.T @ b.F)) <= 1e-12

    def test_multiple_generalized_inverses_satisfy_constraints(self, problems):
        # three different R choices all produce constraint-satisfying H d
        tp = problems["testE"]
        grid = tp.build_grid()
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        rng = np.random.default_rng(5)
        candidates = [None,
                      rng.standard_normal((17, 4)),
                      10.0 * rng.standard_normal((17, 4))]
        solutions = []
        for R in candidates:
            b = iv.compute_basis(cs, R)
            yc = b.H @ cs.d
            np.testing.assert_allclose(cs.C.T @ yc, cs.d, atol=1e-10)
            solutions.append(yc)
        assert np.linalg.norm(solutions[0] - solutions[1]) > 1e-6
        assert np.linalg.norm(solutions[0] - solutions[2]) > 1e-6

    def test_empty_constraint_set(self):
        grid = iv.NodeGrid.uniform(5, 0, 1)
        cs = iv.compile_constraints(grid, [], 3)
        b = iv.compute_basis(cs)
        assert b.F.shape == (5, 5)
        np.testing.assert_allclose(b.F.T @ b.F, np.eye(5), atol=1e-14)
        np.testing.assert_array_equal(b.H @ cs.d, np.zeros(5))


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25, deadline=None)
def test_parameterization_covers_constraint_manifold(seed):
    # H d + F beta satisfies the constraints for any beta
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, 40))
    grid = random_grid(rng, n)
    ls = int(rng.choice([3, 5, 7]))
    p = int(rng.integers(1, 4))
    cons = []
    for _ in range(p):
        order = int(rng.integers(0, min(3, ls)))
        loc = float(rng.uniform(grid.x[0], grid.x[-1]))
        cons.append(iv.Constraint(order, loc, float(rng.uniform(0.5, 2.0))))
    try:
        cs = iv.compile_constraints(grid, cons, ls)
    except iv.ToolkitError:
        return
    b = iv.compute_basis(cs)
    d_norm = np.linalg.norm(cs.d)
    for _ in range(100):
        beta = rng.standard_normal(n - cs.p)
        y = b.H @ cs.d + b.F @ beta
        assert np.linalg.norm(cs.C.T @ y - cs.d) <= 1e-9 * max(d_norm, 1.0)


class TestWellPosed:
    def test_unconstrained_derivative_is_deficient(self):
        grid = iv.NodeGrid.uniform(10, 0, 1)
        op = iv.assemble_operator(
            iv.OdeSpec.from_strings(1, ["0", "1"], (0, 1)), grid, 3)
        cs = iv.compile_constraints(grid, [], 3)
        rep = iv.check_well_posed(op, cs)
        assert not rep.well_posed
        assert rep.n - rep.stacked_rank == 1
        assert rep.lf_nullity == 1

    def test_third_order_initial_value_system(self, problems):
        tp = problems["testA"]
        grid = tp.build_grid()
        op = iv.assemble_operator(tp.ode, grid, 9)
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        rep = iv.check_well_posed(op, cs)
        assert rep.well_posed and rep.lf_nullity == 0

    def test_overconstrained_first_order_system(self, problems):
        # p = 4 constraints on a first-order equation: still well posed
        tp = problems["testE"]
        grid = tp.build_grid()
        op = iv.assemble_operator(tp.ode, grid, 9)
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        rep = iv.check_well_posed(op, cs)
        assert rep.well_posed and rep.lf_nullity == 0
