"""Shared SVD-based pseudoinverse and numerical-rank helpers.

One tolerance rule is used everywhere rank decisions are made:
``tol = max(shape) * eps * sigma_max`` (the conventional numerical-rank rule).
"""

from __future__ import annotations

import numpy as np


def rank_tolerance(shape: tuple[int, int], singular_values: np.ndarray) -> float:
    if singular_values.size == 0:
        return 0.0
    return max(shape) * np.finfo(np.float64).eps * float(singular_values[0])


def numerical_rank(a: np.ndarray) -> int:
    if min(a.shape) == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    return int(np.count_nonzero(sv > rank_tolerance(a.shape, sv)))


def svd_pinv(a: np.ndarray) -> tuple[np.ndarray, int, np.ndarray]:
    """Moore-Penrose pseudoinverse via SVD.

    Returns (pinv, numerical rank, singular values). Singular values at or
    below the shared tolerance are treated as exact zeros.
    """
    m, n = a.shape
    if m == 0 or n == 0:
        return np.zeros((n, m)), 0, np.zeros(0)
    u, sv, vt = np.linalg.svd(a, full_matrices=False)
    tol = rank_tolerance(a.shape, sv)
    rank = int(np.count_nonzero(sv > tol))
    inv = np.zeros_like(sv)
    inv[:rank] = 1.0 / sv[:rank]
    return (vt.T * inv) @ u.T, rank, sv


def frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only float64 copy (immutability contract for results)."""
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out
