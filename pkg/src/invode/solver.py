"""Offline preparation and the O(n^2) per-measurement solve.

prepare() folds operator, constraints and constraint values into the frozen
triple (M, y_h, s). After that each measurement costs one matrix-vector
multiply plus one vector add; uncertainty propagation costs O(n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import frozen, rank_tolerance, svd_pinv
from .constraints import ConstraintBasis
from .errors import (
    DimensionMismatch,
    InvalidMeasurement,
    StaleOperator,
    Underconstrained,
)
from .operators import LinearOperator
from .stats import KsResult, ks_gaussian_test
from .stencils import NodeGrid


@dataclass(frozen=True)
class PreparedSolver:
    """Frozen run-time artifact: y = M g + y_h, sigma_y = sigma_g s.

    The hot path touches only M, y_h and s. N (the map from constraint
    values to y_h) is retained only when requested at preparation time.
    """

    M: np.ndarray = field(repr=False)
    y_h: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    grid: NodeGrid
    meta: dict
    N: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return int(self.M.shape[0])

    def solve(self, g) -> np.ndarray:
        return solve(self, g)


@dataclass(frozen=True)
class Solution:
    """One measurement epoch: values, uncertainty and residual diagnostics."""

    y: np.ndarray
    sigma_y: np.ndarray | None = None
    residual: np.ndarray | None = None
    ks: KsResult | None = None


def prepare(L: LinearOperator, basis: ConstraintBasis, d=None,
            keep_constraint_map: bool = False,
            allow_rank_deficient: bool = False) -> PreparedSolver:
    """Precompute M = F pinv(L F), y_h = (I - M L) H d and the sigma scale s.

    Raises Underconstrained when null(L F) is nonempty (the stacked system
    would admit a family of solutions). ``allow_rank_deficient`` downgrades
    that to a truncated-pseudoinverse minimum-norm solution; support-length
    studies use it to keep borderline discretizations comparable instead of
    aborting the study.
    """
    n = L.n
    cs = basis.cs
    if cs.grid.n != n:
        raise DimensionMismatch("operator and constraints use different grids")
    d = cs.d if d is None else np.asarray(d, dtype=np.float64)
    if d.shape != (cs.p,):
        raise DimensionMismatch(f"d must have length {cs.p}, got {d.shape}")

    lf = L.entries @ basis.F
    lf_pinv, rank, sv = svd_pinv(lf)
    if rank < lf.shape[1] and not allow_rank_deficient:
        raise Underconstrained(
            f"null(L F) has dimension {lf.shape[1] - rank}; "
            "add constraints to make the problem unique")

    M = basis.F @ lf_pinv
    y_c = basis.H @ d
    y_h = y_c - M @ (L.entries @ y_c)
    s = np.sqrt(np.sum(M * M, axis=1))
    meta = {
        "n": n,
        "ode_order": L.order,
        "support_length": L.support,
        "num_constraints": cs.p,
        "rank_LF": rank,
        "smallest_sv_LF": float(sv[rank - 1]) if rank else 0.0,
        "rank_tolerance": rank_tolerance(lf.shape, sv),
        "operator_digest": L.digest,
        "constraint_digest": cs.digest,
        "precision": "double",
    }
    N = None
    if keep_constraint_map:
        N = frozen(basis.H - M @ (L.entries @ basis.H))
    return PreparedSolver(M=frozen(M), y_h=frozen(y_h), s=frozen(s),
                          grid=L.grid, meta=meta, N=N)


def with_constraint_values(ps: PreparedSolver, d_new) -> PreparedSolver:
    """Offline rebuild of y_h for new constraint values (requires stored N)."""
    if ps.N is None:
        raise ValueError("prepare(..., keep_constraint_map=True) required")
    d_new = np.asarray(d_new, dtype=np.float64)
    if d_new.shape != (ps.N.shape[1],):
        raise DimensionMismatch(
            f"d must have length {ps.N.shape[1]}, got {d_new.shape}")
    return PreparedSolver(M=ps.M, y_h=frozen(ps.N @ d_new), s=ps.s,
                          grid=ps.grid, meta=dict(ps.meta), N=ps.N)


def _check_measurement(ps: PreparedSolver, g) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (ps.n,):
        raise DimensionMismatch(f"expected {ps.n} measurements, got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise InvalidMeasurement("measurement vector contains non-finite values")
    return g


def solve(ps: PreparedSolver, g) -> np.ndarray:
    """y = M g + y_h. Exactly n^2 multiplies and n^2 adds, one output vector."""
    g = _check_measurement(ps, g)
    y = ps.M @ g
    y += ps.y_h
    return y


def solve_counted(ps: PreparedSolver, g) -> tuple[np.ndarray, dict]:
    """Reference solve with explicit row-major loops and FLOP counters.

    Slow path used to certify the work contract; accumulation order is
    row-major, left to right, matching the emitted C kernels.
    """
    g = _check_measurement(ps, g)
    n = ps.n
    M = ps.M
    y_h = ps.y_h
    y = np.empty(n)
    mul = 0
    add = 0
    for r in range(n):
        acc = M[r, 0] * g[0]
        mul += 1
        for c in range(1, n):
            acc += M[r, c] * g[c]
            mul += 1
            add += 1
        y[r] = acc + y_h[r]
        add += 1
    return y, {"mul": mul, "add": add, "total": mul + add}


def propagate_covariance(ps: PreparedSolver, sigma_g: float) -> np.ndarray:
    """sigma_y = sigma_g * s for i.i.d. measurement noise. O(n) at run time."""
    if sigma_g < 0:
        raise ValueError("sigma_g must be >= 0")
    return sigma_g * ps.s


def propagate_covariance_full(ps: PreparedSolver, cov_g: np.ndarray) -> np.ndarray:
    """Diagonal of M cov_g M^T for a general measurement covariance.

    Offline-only: O(n^3) work, provided for correlated-noise studies.
    """
    cov_g = np.asarray(cov_g, dtype=np.float64)
    if cov_g.shape != (ps.n, ps.n):
        raise DimensionMismatch(f"covariance must be {(ps.n, ps.n)}")
    return np.einsum("ij,jk,ik->i", ps.M, cov_g, ps.M)


def residual(ps: PreparedSolver, L: LinearOperator, g) -> np.ndarray:
    """eps = g - L (M g + y_h): forward-model misfit of the reconstruction."""
    if L.digest != ps.meta["operator_digest"]:
        raise StaleOperator("operator does not match the prepared artifact")
    g = _check_measurement(ps, g)
    return g - L.entries @ solve(ps, g)


def full_solution(ps: PreparedSolver, g, sigma_g: float | None = None,
                  L: LinearOperator | None = None,
                  alpha: float = 0.05) -> Solution:
    """Solve plus optional uncertainty and residual diagnostics."""
    y = solve(ps, g)
    sigma_y = propagate_covariance(ps, sigma_g) if sigma_g is not None else None
    eps = None
    ks = None
    if L is not None:
        eps = residual(ps, L, g)
        if ps.n >= 5:
            try:
                ks = ks_gaussian_test(eps, alpha)
            except Exception:
                ks = None
    return Solution(y=y, sigma_y=sigma_y, residual=eps, ks=ks)
