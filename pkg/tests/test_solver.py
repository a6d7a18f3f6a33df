import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import invode as iv
from invode.errors import (
    DimensionMismatch,
    InvalidMeasurement,
    StaleOperator,
    Underconstrained,
)
from invode._linalg import frozen
from invode.operators import LinearOperator

from conftest import random_well_posed_system, synthetic_prepared


def _two_node_derivative_system(c=4.0):
    # y' = g on two nodes, y(0) = c, operator entered directly
    grid = iv.NodeGrid(np.array([0.0, 1.0]))
    L = LinearOperator(entries=frozen(np.array([[-1.0, 1.0], [-1.0, 1.0]])),
                       grid=grid, support=2, order=1)
    cs = iv.compile_constraints(grid, [iv.Constraint(0, 0.0, c)], 1)
    return L, cs


class TestPrepare:
    def test_two_node_constant_solution(self):
        L, cs = _two_node_derivative_system(c=4.0)
        ps = iv.prepare(L, iv.compute_basis(cs))
        np.testing.assert_allclose(ps.y_h, [4.0, 4.0], atol=1e-14)
        np.testing.assert_allclose(iv.solve(ps, np.zeros(2)), [4.0, 4.0],
                                   atol=1e-14)

    def test_underconstrained_rejected(self):
        grid = iv.NodeGrid.uniform(8, 0, 1)
        op = iv.assemble_operator(
            iv.OdeSpec.from_strings(1, ["0", "1"], (0, 1)), grid, 3)
        cs = iv.compile_constraints(grid, [], 3)
        with pytest.raises(Underconstrained):
            iv.prepare(op, iv.compute_basis(cs))

    def test_initial_value_accuracy(self, problems):
        # third-order constant-coefficient problem on synthesized nodes
        rep = iv.run_test_problem(problems["testA"])
        assert rep.error_2norm <= 1e-6

    def test_variable_coefficient_accuracy(self, problems):
        rep = iv.run_test_problem(problems["testC"])
        assert rep.relative_error <= 1e-5

    def test_sigma_scale_definition(self, prepared_test_e):
        ps = prepared_test_e[0]
        np.testing.assert_allclose(ps.s, np.sqrt((ps.M ** 2).sum(axis=1)),
                                   atol=1e-15)

    def test_rebuild_homogeneous_part(self, problems):
        tp = problems["testE"]
        grid = tp.build_grid()
        op = iv.assemble_operator(tp.ode, grid, 9)
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        basis = iv.compute_basis(cs)
        ps = iv.prepare(op, basis, keep_constraint_map=True)
        d_new = np.array([0.1, -0.2, 0.5, 0.3])
        ps2 = iv.with_constraint_values(ps, d_new)
        ps_ref = iv.prepare(op, basis, d=d_new)
        np.testing.assert_allclose(ps2.y_h, ps_ref.y_h, atol=1e-12)
        np.testing.assert_array_equal(ps2.M, ps.M)


class TestSolve:
    def test_zero_measurement_returns_homogeneous_part(self, prepared_test_e):
        ps = prepared_test_e[0]
        np.testing.assert_array_equal(iv.solve(ps, np.zeros(ps.n)), ps.y_h)

    def test_identity_kernel_passthrough(self):
        ps = synthetic_prepared(np.eye(4))
        g = np.array([1.0, -2.0, 3.0, 0.5])
        np.testing.assert_array_equal(iv.solve(ps, g), g)

    def test_dimension_mismatch(self, prepared_test_e):
        with pytest.raises(DimensionMismatch):
            iv.solve(prepared_test_e[0], np.zeros(5))

    def test_non_finite_measurement(self, prepared_test_e):
        g = np.zeros(prepared_test_e[0].n)
        g[3] = np.nan
        with pytest.raises(InvalidMeasurement):
            iv.solve(prepared_test_e[0], g)

    def test_counted_solve_flops(self):
        rng = np.random.default_rng(0)
        for n in (10, 21, 50):
            ps = synthetic_prepared(rng.standard_normal((n, n)),
                                    rng.standard_normal(n))
            g = rng.standard_normal(n)
            y, counts = iv.solve_counted(ps, g)
            assert counts["mul"] == n * n
            assert counts["add"] == n * n
            assert counts["total"] == 2 * n * n
            np.testing.assert_allclose(y, iv.solve(ps, g), rtol=1e-13)
        # the sensor-chain example size
        ps = synthetic_prepared(rng.standard_normal((21, 21)))
        _, counts = iv.solve_counted(ps, np.zeros(21))
        assert counts["total"] == 882

    def test_artifact_arrays_are_frozen(self, prepared_test_e):
        # shared-across-threads contract: results are read-only
        ps = prepared_test_e[0]
        for arr in (ps.M, ps.y_h, ps.s, ps.grid.x):
            with pytest.raises(ValueError):
                arr[0] = 0.0 if arr.ndim == 1 else arr[0]

    def test_superposition(self, prepared_test_e):
        ps = prepared_test_e[0]
        rng = np.random.default_rng(1)
        g1 = rng.standard_normal(ps.n)
        g2 = rng.standard_normal(ps.n)
        lhs = iv.solve(ps, g1 + g2) - ps.y_h
        rhs = (iv.solve(ps, g1) - ps.y_h) + (iv.solve(ps, g2) - ps.y_h)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestLeastSquaresOptimality:
    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=10, deadline=None)
    def test_matches_normal_equation_oracle(self, seed):
        rng = np.random.default_rng(seed)
        op, cs, basis = random_well_posed_system(rng)
        ps = iv.prepare(op, basis)
        g = rng.standard_normal(op.n)
        y = iv.solve(ps, g)
        # dense normal equations on the null-space parameters
        A = op.entries @ basis.F
        rhs = g - op.entries @ (basis.H @ cs.d)
        beta = np.linalg.solve(A.T @ A, A.T @ rhs)
        y_oracle = basis.H @ cs.d + basis.F @ beta
        assert np.linalg.norm(y - y_oracle) <= 1e-7 * max(
            1.0, np.linalg.norm(y_oracle))

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=10, deadline=None)
    def test_constraints_always_satisfied(self, seed):
        rng = np.random.default_rng(seed)
        op, cs, basis = random_well_posed_system(rng)
        ps = iv.prepare(op, basis)
        for _ in range(25):
            g = rng.standard_normal(op.n) * rng.uniform(0.1, 10)
            y = iv.solve(ps, g)
            bound = 1e-8 * (np.linalg.norm(cs.d) + np.linalg.norm(g))
            assert np.linalg.norm(cs.C.T @ y - cs.d) <= bound

    def test_solution_independent_of_generalized_inverse(self, problems):
        # R shifts H but never the final solution
        tp = problems["testE"]
        grid = tp.build_grid()
        op = iv.assemble_operator(tp.ode, grid, 9)
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        rng = np.random.default_rng(3)
        g = rng.standard_normal(grid.n)
        y0 = iv.solve(iv.prepare(op, iv.compute_basis(cs)), g)
        for _ in range(3):
            R = rng.standard_normal((grid.n - cs.p, cs.p))
            yr = iv.solve(iv.prepare(op, iv.compute_basis(cs, R)), g)
            assert np.linalg.norm(yr - y0) <= 1e-8 * np.linalg.norm(y0)


class TestCovariance:
    def test_zero_noise(self, prepared_test_e):
        np.testing.assert_array_equal(
            iv.propagate_covariance(prepared_test_e[0], 0.0),
            np.zeros(prepared_test_e[0].n))

    def test_identity_kernel_unit_scale(self):
        ps = synthetic_prepared(np.eye(6))
        np.testing.assert_allclose(iv.propagate_covariance(ps, 2.5),
                                   2.5 * np.ones(6), atol=1e-15)

    def test_full_covariance_matches_iid_special_case(self, prepared_test_e):
        ps = prepared_test_e[0]
        sigma = 0.3
        diag = iv.propagate_covariance_full(ps, sigma ** 2 * np.eye(ps.n))
        np.testing.assert_allclose(np.sqrt(diag),
                                   iv.propagate_covariance(ps, sigma),
                                   rtol=1e-12)

    def test_full_covariance_general_matrix(self, prepared_test_e):
        ps = prepared_test_e[0]
        rng = np.random.default_rng(2)
        A = rng.standard_normal((ps.n, ps.n))
        cov = A @ A.T
        want = np.diag(ps.M @ cov @ ps.M.T)
        np.testing.assert_allclose(iv.propagate_covariance_full(ps, cov),
                                   want, rtol=1e-10)

    def test_negative_sigma_rejected(self, prepared_test_e):
        with pytest.raises(ValueError):
            iv.propagate_covariance(prepared_test_e[0], -1.0)


class TestResidual:
    def test_polynomial_problem_residual_at_roundoff(self, problems):
        tp = problems["testE"]
        grid = tp.build_grid()
        op = iv.assemble_operator(tp.ode, grid, 9)
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        ps = iv.prepare(op, iv.compute_basis(cs))
        g = iv.eval_vector(tp.ode.forcing, grid)
        eps = iv.residual(ps, op, g)
        assert np.max(np.abs(eps)) <= 1e-9 * max(1.0, np.max(np.abs(g)))

    def test_stale_operator_rejected(self, problems):
        tp = problems["testE"]
        grid = tp.build_grid()
        op = iv.assemble_operator(tp.ode, grid, 9)
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        ps = iv.prepare(op, iv.compute_basis(cs))
        other = iv.assemble_operator(tp.ode, grid, 11)
        with pytest.raises(StaleOperator):
            iv.residual(ps, other, np.zeros(ps.n))

    def test_noise_passthrough_matches_projector_oracle(self, problems):
        # residual of noisy data is the noise projected onto the complement
        # of range(L F); per-node spread follows the projector diagonal
        tp = problems["testE"]
        grid = tp.build_grid()
        op = iv.assemble_operator(tp.ode, grid, 9)
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        ps = iv.prepare(op, iv.compute_basis(cs))
        g = iv.eval_vector(tp.ode.forcing, grid)

        proj = np.eye(ps.n) - op.entries @ ps.M
        predicted = np.sqrt(np.abs(np.diag(proj @ proj.T)))

        sigma = 0.01
        rng = np.random.default_rng(11)
        samples = np.array([
            iv.residual(ps, op, g + sigma * rng.standard_normal(ps.n))
            for _ in range(2000)])
        measured = samples.std(axis=0, ddof=1) / sigma
        keep = predicted > 0.05  # nodes with non-negligible residual content
        assert np.all(np.abs(measured[keep] - predicted[keep])
                      <= 0.25 * predicted[keep])

    def test_homogeneous_consistent_system(self):
        L, cs = _two_node_derivative_system(c=0.0)
        ps = iv.prepare(L, iv.compute_basis(cs))
        eps = iv.residual(ps, L, np.zeros(2))
        assert np.max(np.abs(eps)) <= 1e-12


class TestFullSolution:
    def test_bundles_diagnostics(self, problems):
        tp = problems["testE"]
        grid = tp.build_grid()
        op = iv.assemble_operator(tp.ode, grid, 9)
        cs = iv.compile_constraints(grid, tp.constraints, 9)
        ps = iv.prepare(op, iv.compute_basis(cs))
        g = iv.eval_vector(tp.ode.forcing, grid)
        rng = np.random.default_rng(0)
        sol = iv.full_solution(ps, g + 0.01 * rng.standard_normal(ps.n),
                               sigma_g=0.01, L=op)
        assert sol.y.shape == (ps.n,)
        np.testing.assert_allclose(sol.sigma_y, 0.01 * ps.s, atol=1e-15)
        assert sol.residual is not None and sol.ks is not None
