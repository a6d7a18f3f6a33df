#!/usr/bin/env python3
"""Regenerate the problem-spec fixture files in fixtures/.

The benchmark definitions live in invode.reference; this script freezes them
into CLI-ready spec documents (including the synthesized node set for the
variable-density problem) so the fixtures are plain data.
"""

import json
from pathlib import Path

import numpy as np

import invode as iv
from invode.reference import constrained_octic, _poly_expr_text

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures"


def fmt(v):
    return float(format(float(v), ".17g"))


def constraint_docs(constraints):
    return [{"order": c.order, "location": fmt(c.location), "value": fmt(c.value)}
            for c in constraints]


def main():
    OUT.mkdir(exist_ok=True)
    problems = iv.problems()

    # third-order constant-coefficient problem on synthesized nodes
    tp = problems["testA"]
    grid = tp.build_grid()
    docs = {
        "test_a.json": {
            "ode": {"order": 3, "coefficients": ["1", "3", "3", "1"],
                    "forcing": "30*exp(-x)"},
            "grid": {"nodes": [fmt(x) for x in grid.x]},
            "constraints": constraint_docs(tp.constraints),
            "discretization": {"support_length": 9},
        },
        "test_b.json": {
            "ode": {"order": 3, "coefficients": ["1", "3", "3", "1"],
                    "forcing": "30*exp(-x)"},
            "grid": {"n": 20, "lo": 0.0, "hi": 8.0, "spacing": "uniform"},
            "constraints": constraint_docs(tp.constraints),
            "discretization": {"support_length": 9},
        },
        "test_c.json": {
            "ode": {"order": 2, "coefficients": ["-2", "-x", "2*x^2"],
                    "forcing": "0"},
            "grid": {"n": 69, "lo": 1.0, "hi": 10.0, "spacing": "uniform"},
            "constraints": constraint_docs(problems["testC"].constraints),
            "discretization": {"support_length": 15},
        },
        "pil_test_a.json": {
            "ode": {"order": 3, "coefficients": ["1", "3", "3", "1"],
                    "forcing": "30*exp(-x)"},
            "grid": {"n": 10, "lo": 0.0, "hi": 0.1, "spacing": "uniform"},
            "constraints": constraint_docs(tp.constraints),
            "discretization": {"support_length": 5},
        },
    }

    octic = constrained_octic()
    forcing = _poly_expr_text(np.polyder(octic))
    docs["test_e.json"] = {
        "ode": {"order": 1, "coefficients": ["0", "1"], "forcing": forcing},
        "grid": {"n": 21, "lo": 0.0, "hi": 1.0, "spacing": "uniform"},
        "constraints": constraint_docs(problems["testE"].constraints),
        "discretization": {"support_length": 9},
        "noise": {"sigma_g": 0.01},
    }
    docs["pil_test_e.json"] = {
        "ode": {"order": 1, "coefficients": ["0", "1"], "forcing": forcing},
        "grid": {"n": 10, "lo": 0.0, "hi": 0.1, "spacing": "uniform"},
        "constraints": [
            {"order": 0, "location": 0.0556, "value": 0.0},
            {"order": 0, "location": 0.1, "value": -0.1},
            {"order": 1, "location": 0.0, "value": 1.0},
            {"order": 1, "location": 0.1, "value": 0.0},
        ],
        "discretization": {"support_length": 5},
    }

    for name, doc in docs.items():
        path = OUT / name
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
