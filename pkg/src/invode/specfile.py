"""Problem specification files (JSON) and their validation.

Schema:

    {
      "ode": {"order": m, "coefficients": ["a_0", ..., "a_m"], "forcing": "..."},
      "grid": {"nodes": [x1, ...]} | {"n": int, "lo": f, "hi": f,
                                      "spacing": "uniform"},
      "constraints": [{"order": i, "location": x, "value": d}, ...],
      "discretization": {"support_length": l_s},
      "noise": {"sigma_g": f}            # optional
    }

Validation happens before any numerics; messages name the offending key.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constraints import Constraint
from .operators import OdeSpec
from .stencils import NodeGrid


@dataclass(frozen=True)
class ProblemSpec:
    ode: OdeSpec
    grid: NodeGrid
    constraints: tuple[Constraint, ...]
    support_length: int
    sigma_g: float | None


class SpecError(ValueError):
    """Problem-spec document failed validation."""


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise SpecError(f"missing {where}.{key}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SpecError(f"{where}.{key} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise SpecError(f"{where}.{key} must be {kind.__name__}")
    return value


def parse_document(doc: dict) -> ProblemSpec:
    if not isinstance(doc, dict):
        raise SpecError("top level must be an object")
    for key in doc:
        if key not in ("ode", "grid", "constraints", "discretization", "noise"):
            raise SpecError(f"unknown section {key!r}")

    ode_doc = _require(doc, "ode", dict, "spec")
    order = _require(ode_doc, "order", int, "ode")
    coeffs = _require(ode_doc, "coefficients", list, "ode")
    if len(coeffs) != order + 1:
        raise SpecError(
            f"ode.coefficients must list a_0..a_m ({order + 1} entries), "
            f"got {len(coeffs)}")
    if not all(isinstance(c, str) for c in coeffs):
        raise SpecError("ode.coefficients entries must be expression strings")
    forcing = ode_doc.get("forcing")
    if forcing is not None and not isinstance(forcing, str):
        raise SpecError("ode.forcing must be an expression string")

    grid_doc = _require(doc, "grid", dict, "spec")
    if "nodes" in grid_doc:
        nodes = np.asarray(grid_doc["nodes"], dtype=np.float64)
        if nodes.ndim != 1 or nodes.size < 2:
            raise SpecError("grid.nodes must list at least two values")
        grid = NodeGrid(nodes)
    else:
        n = _require(grid_doc, "n", int, "grid")
        lo = _require(grid_doc, "lo", float, "grid")
        hi = _require(grid_doc, "hi", float, "grid")
        spacing = grid_doc.get("spacing", "uniform")
        if spacing != "uniform":
            raise SpecError(f"grid.spacing must be 'uniform', got {spacing!r}")
        if n < 2 or hi <= lo:
            raise SpecError("grid needs n >= 2 and hi > lo")
        grid = NodeGrid.uniform(n, lo, hi)
    lo_hi = grid.span

    cons_doc = _require(doc, "constraints", list, "spec")
    constraints = []
    for k, c in enumerate(cons_doc):
        if not isinstance(c, dict):
            raise SpecError(f"constraints[{k}] must be an object")
        constraints.append(Constraint(
            order=_require(c, "order", int, f"constraints[{k}]"),
            location=_require(c, "location", float, f"constraints[{k}]"),
            value=_require(c, "value", float, f"constraints[{k}]")))

    disc = _require(doc, "discretization", dict, "spec")
    ls = _require(disc, "support_length", int, "discretization")

    sigma_g = None
    if "noise" in doc:
        sigma_g = _require(doc["noise"], "sigma_g", float, "noise")
        if sigma_g < 0:
            raise SpecError("noise.sigma_g must be >= 0")

    ode = OdeSpec.from_strings(order, coeffs, lo_hi, forcing)
    return ProblemSpec(ode=ode, grid=grid, constraints=tuple(constraints),
                       support_length=ls, sigma_g=sigma_g)


def load(path) -> ProblemSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON in {path}: {exc}") from None
    return parse_document(doc)
