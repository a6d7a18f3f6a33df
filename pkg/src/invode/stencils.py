"""Polynomial stencil weights and differentiation matrices on arbitrary nodes.

Weights come from the incremental Newton-form recursion for interpolation
derivatives at an arbitrary evaluation point, which is stable on arbitrary
node layouts (no Vandermonde inversion). Differentiation matrices keep a
constant approximation degree on every row: windows near the ends of the
grid are shifted toward the interior, never shortened.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._linalg import frozen
from .errors import (
    DegenerateStencil,
    InsufficientNodes,
    InsufficientSupport,
    UnsupportedSupport,
)


@dataclass(frozen=True)
class NodeGrid:
    """Strictly increasing abscissae where measurements and solutions live."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("grid needs at least two nodes in a 1-d array")
        if not np.all(np.diff(x) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        object.__setattr__(self, "x", frozen(x))

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @classmethod
    def uniform(cls, n: int, lo: float, hi: float) -> "NodeGrid":
        return cls(np.linspace(lo, hi, n))


@dataclass(frozen=True)
class StencilWeights:
    """Interpolation-derivative weights of one window at one evaluation point.

    ``weights_by_order[i]`` applied to samples over ``window_indices``
    reproduces the i-th derivative of the unique interpolant at ``x_eval``.
    """

    window_indices: tuple[int, ...]
    weights_by_order: np.ndarray  # shape (max_order + 1, l_s), read-only
    x_eval: float

    def order(self, i: int) -> np.ndarray:
        return self.weights_by_order[i]


@dataclass(frozen=True)
class DiffMatrix:
    """Banded n-by-n map from sampled values to sampled derivative estimates."""

    order: int
    support: int
    entries: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])


def fd_weights(window_nodes, x_eval: float, max_order: int,
               window_indices: tuple[int, ...] | None = None) -> StencilWeights:
    """Derivative weights of orders 0..max_order on an arbitrary node window.

    Newton-form recursion over the window nodes; exact (to roundoff) for the
    degree l_s-1 interpolant, including the order-0 interpolation row.
    """
    x = np.asarray(window_nodes, dtype=np.float64)
    ls = x.size
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    if max_order >= ls:
        raise InsufficientSupport(
            f"order {max_order} needs a window of more than {ls} nodes")
    if np.unique(x).size != ls:
        raise DegenerateStencil("window nodes must be pairwise distinct")
    if ls >= 2:
        span = float(np.max(x) - np.min(x))
        min_gap = float(np.min(np.abs(np.diff(np.sort(x)))))
        if min_gap <= ls * np.finfo(np.float64).eps * span:
            raise DegenerateStencil(
                "window nodes are indistinguishable at double precision")
        if min_gap < 1e-8 * span:
            # no principled threshold exists; flag clearly fragile fits
            warnings.warn("severely clustered window nodes; stencil weights "
                          "may be ill-conditioned", RuntimeWarning,
                          stacklevel=2)

    z = float(x_eval)
    c = np.zeros((ls, max_order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - z
    for i in range(1, ls):
        mn = min(i, max_order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2

    if window_indices is None:
        window_indices = tuple(range(ls))
    return StencilWeights(window_indices=tuple(window_indices),
                          weights_by_order=frozen(c.T),
                          x_eval=z)


def window_start(n: int, center: int, ls: int) -> int:
    """Start index of the l_s-node window centered on ``center``.

    Clamped at both grid ends so the window is shifted, never shortened.
    The centering bias for even offsets is toward lower indices.
    """
    half = (ls - 1) // 2
    return min(max(center - half, 0), n - ls)


def nearest_window(grid: NodeGrid, x_c: float, ls: int) -> int:
    """Start index of the contiguous window of the l_s nodes nearest x_c.

    Ties are broken toward the lower start index.
    """
    x = grid.x
    n = grid.n
    if ls > n:
        raise InsufficientNodes(f"support {ls} exceeds grid size {n}")
    j = int(np.searchsorted(x, x_c))
    best_s = None
    best_cost = np.inf
    for s in range(max(0, j - ls), min(n - ls, j) + 1):
        cost = max(abs(x[s] - x_c), abs(x[s + ls - 1] - x_c))
        if cost < best_cost:
            best_s, best_cost = s, cost
    assert best_s is not None
    return best_s


def build_diff_matrix(grid: NodeGrid, order: int, ls: int) -> DiffMatrix:
    """Differentiation matrix of the given order with support length l_s.

    Every row carries a full degree l_s-1 formula: interior rows use the
    window centered on the row's node, end rows use the same-length window
    shifted inward.
    """
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    if ls % 2 == 0:
        raise UnsupportedSupport(f"support length must be odd, got {ls}")
    n = grid.n
    if ls > n:
        raise InsufficientNodes(f"support {ls} exceeds grid size {n}")
    if order >= ls:
        raise InsufficientSupport(
            f"order {order} needs support length > {order}, got {ls}")

    x = grid.x
    entries = np.zeros((n, n))
    for r in range(n):
        s = window_start(n, r, ls)
        w = fd_weights(x[s:s + ls], x[r], order).order(order).copy()
        # negative-sum trick: the own-node weight absorbs the roundoff of
        # the others, making every row sum exactly zero
        own = r - s
        w[own] = 0.0
        w[own] = -np.sum(w)
        entries[r, s:s + ls] = w
    return DiffMatrix(order=order, support=ls, entries=frozen(entries))
