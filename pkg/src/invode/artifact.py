"""Prepared-artifact files: self-describing JSON with 17-digit decimals.

The writer formats every float with 17 significant digits, which round-trips
IEEE doubles losslessly, and emits keys in a fixed order so identical
artifacts produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ._linalg import frozen
from .solver import PreparedSolver
from .stencils import NodeGrid

FORMAT_VERSION = 1


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _fmt_array(a: np.ndarray) -> str:
    return "[" + ", ".join(_fmt(v) for v in np.asarray(a).ravel()) + "]"


def dumps(ps: PreparedSolver) -> str:
    meta = dict(ps.meta)
    parts = [
        "{",
        f'  "version": {FORMAT_VERSION},',
        f'  "n": {ps.n},',
        f'  "grid": {_fmt_array(ps.grid.x)},',
        f'  "M": {_fmt_array(ps.M)},',
        f'  "y_h": {_fmt_array(ps.y_h)},',
        f'  "s": {_fmt_array(ps.s)},',
        f'  "meta": {json.dumps(meta, sort_keys=True)}',
        "}",
    ]
    return "\n".join(parts) + "\n"


def loads(text: str) -> PreparedSolver:
    doc = json.loads(text)
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported artifact version {doc.get('version')!r}")
    n = int(doc["n"])
    grid = NodeGrid(np.asarray(doc["grid"], dtype=np.float64))
    M = np.asarray(doc["M"], dtype=np.float64)
    if M.size != n * n:
        raise ValueError(f"M has {M.size} entries, expected {n * n}")
    M = M.reshape(n, n)
    y_h = np.asarray(doc["y_h"], dtype=np.float64)
    s = np.asarray(doc["s"], dtype=np.float64)
    if y_h.shape != (n,) or s.shape != (n,):
        raise ValueError("y_h / s length does not match n")
    return PreparedSolver(M=frozen(M), y_h=frozen(y_h), s=frozen(s),
                          grid=grid, meta=dict(doc["meta"]))


def save(ps: PreparedSolver, path) -> None:
    Path(path).write_text(dumps(ps), encoding="utf-8")


def load(path) -> PreparedSolver:
    return loads(Path(path).read_text(encoding="utf-8"))
