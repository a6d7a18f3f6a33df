"""Generalized linear constraints and their null-space parameterization.

A constraint pins the value of y or one of its derivatives at a location
anywhere inside the grid span (nodes or off-node points). Compiled together
they read C^T y = d. Every y that satisfies the constraints can be written
as H d + F beta, where the columns of F span null(C^T) orthonormally.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ._linalg import frozen, numerical_rank, rank_tolerance, svd_pinv
from .errors import (
    ConstraintOutOfRange,
    DependentConstraints,
    InconsistentConstraints,
)
from .operators import LinearOperator
from .stencils import NodeGrid, fd_weights, nearest_window


@dataclass(frozen=True)
class Constraint:
    """One (derivative order, location, value) condition."""

    order: int
    location: float
    value: float

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("derivative order must be >= 0")


@dataclass(frozen=True)
class ConstraintSet:
    """Compiled constraints: columns of C with the value vector d."""

    constraints: tuple[Constraint, ...]
    C: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    grid: NodeGrid
    support: int

    @property
    def p(self) -> int:
        return int(self.C.shape[1])

    @property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.C).tobytes())
        h.update(np.ascontiguousarray(self.d).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class ConstraintBasis:
    """Null-space basis F, particular map H and the generating set."""

    cs: ConstraintSet
    P: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class WellPosedReport:
    """Rank diagnostics of the stacked system [L; C^T]."""

    n: int
    stacked_rank: int
    singular_values: np.ndarray = field(repr=False)
    well_posed: bool
    lf_nullity: int
    smallest_relevant_sv: float


def compile_constraints(grid: NodeGrid, constraints, ls: int) -> ConstraintSet:
    """Turn constraints into columns of C (order-i stencil rows at x_c).

    Each location uses the window of the l_s grid nodes nearest to it, so
    off-node locations are first-class. Dependent or contradictory
    constraint lists are rejected.
    """
    cons = tuple(constraints)
    n = grid.n
    x_lo, x_hi = grid.span
    tol_span = 1e-12 * max(1.0, abs(x_hi - x_lo))

    C = np.zeros((n, len(cons)))
    d = np.zeros(len(cons))
    for k, con in enumerate(cons):
        if not (x_lo - tol_span <= con.location <= x_hi + tol_span):
            raise ConstraintOutOfRange(
                f"location {con.location} outside grid span [{x_lo}, {x_hi}]")
        s = nearest_window(grid, con.location, ls)
        w = fd_weights(grid.x[s:s + ls], con.location, con.order)
        C[s:s + ls, k] = w.order(con.order)
        d[k] = con.value

    p = len(cons)
    if p:
        rank = numerical_rank(C)
        if rank < p:
            # distinguish duplicated-but-consistent from contradictory sets
            augmented = np.vstack([C, d])
            if numerical_rank(augmented) > rank:
                raise InconsistentConstraints(
                    f"values are contradictory: rank(C)={rank} but the "
                    f"augmented system has rank {numerical_rank(augmented)}")
            raise DependentConstraints(
                f"only {rank} of {p} constraints are independent")
    return ConstraintSet(constraints=cons, C=frozen(C), d=frozen(d),
                         grid=grid, support=ls)


def compute_basis(cs: ConstraintSet, R: np.ndarray | None = None) -> ConstraintBasis:
    """P = pinv(C^T); F = orthonormal null(C^T) from a full QR; H = P + F R.

    R defaults to zero (the Moore-Penrose choice). Any R yields the same
    final solution; it only moves the particular constraint-satisfying
    vector H d inside the admissible affine subspace.
    """
    n = cs.grid.n
    p = cs.p
    P, _, _ = svd_pinv(cs.C.T)
    if p:
        q, _ = np.linalg.qr(cs.C, mode="complete")
        F = q[:, p:]
    else:
        F = np.eye(n)
    if R is None:
        R = np.zeros((n - p, p))
    else:
        R = np.asarray(R, dtype=np.float64)
        if R.shape != (n - p, p):
            raise ValueError(f"R must be {(n - p, p)}, got {R.shape}")
    H = P + F @ R
    return ConstraintBasis(cs=cs, P=frozen(P), F=frozen(F),
                           H=frozen(H), R=frozen(R))


def check_well_posed(L: LinearOperator, cs: ConstraintSet,
                     tol: float | None = None) -> WellPosedReport:
    """rank [L; C^T] = n is required for a unique constrained solution.

    Also reports the dimension of null(L F); a nonzero value means the
    operator is not sufficiently constrained even if the stack is square.
    """
    stacked = np.vstack([L.entries, cs.C.T])
    sv = np.linalg.svd(stacked, compute_uv=False)
    cutoff = tol if tol is not None else rank_tolerance(stacked.shape, sv)
    rank = int(np.count_nonzero(sv > cutoff))
    n = L.n

    basis = compute_basis(cs)
    lf = L.entries @ basis.F
    if lf.shape[1]:
        sv_lf = np.linalg.svd(lf, compute_uv=False)
        lf_null = lf.shape[1] - int(
            np.count_nonzero(sv_lf > rank_tolerance(lf.shape, sv_lf)))
    else:
        lf_null = 0

    smallest = float(sv[n - 1]) if sv.size >= n else 0.0
    return WellPosedReport(n=n, stacked_rank=rank,
                           singular_values=frozen(sv),
                           well_posed=(rank == n),
                           lf_nullity=lf_null,
                           smallest_relevant_sv=smallest)
