"""Reference baselines and experiment harnesses.

Contains the adaptive Dormand-Prince 5(4) comparison integrator, a small
registry of fully specified benchmark problems with analytic solutions,
and the three standard studies: single-problem accuracy report, support
length sweep, and the Monte Carlo noise study.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .constraints import Constraint, compile_constraints, compute_basis
from .errors import StiffnessFailure
from .expressions import Expression, eval_vector, parse
from .operators import OdeSpec, assemble_operator
from .solver import PreparedSolver, prepare, propagate_covariance, solve
from .stencils import NodeGrid

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                -92097 / 339200, 187 / 2100, 1 / 40])
_ERR = _B5 - _B4

_MAX_STEPS = 100_000


@dataclass(frozen=True)
class FirstOrderSystem:
    """Companion form u' = f(x, u) of a linear ODE with initial values."""

    dimension: int
    rhs: object  # callable (x, u) -> ndarray
    x0: float
    u0: np.ndarray

    @classmethod
    def from_ode(cls, spec: OdeSpec, constraints) -> "FirstOrderSystem":
        """Companion reduction; valid only for initial-value constraint sets.

        All constraints must sit at the interval start with derivative
        orders 0 .. m-1 exactly once each.
        """
        m = spec.order
        if spec.forcing is None:
            raise ValueError("companion reduction needs a forcing expression")
        x0 = spec.interval[0]
        by_order: dict[int, float] = {}
        for con in constraints:
            if abs(con.location - x0) > 1e-12 * max(1.0, abs(x0)):
                raise ValueError("companion reduction needs all constraints at x0")
            by_order[con.order] = con.value
        if sorted(by_order) != list(range(m)):
            raise ValueError(f"need exactly the orders 0..{m - 1} at x0")
        u0 = np.array([by_order[i] for i in range(m)], dtype=np.float64)
        coeffs = spec.coefficients
        forcing = spec.forcing

        def rhs(x: float, u: np.ndarray) -> np.ndarray:
            du = np.empty(m)
            du[:-1] = u[1:]
            acc = forcing(x)
            for i in range(m):
                acc -= coeffs[i](x) * u[i]
            du[-1] = acc / coeffs[m](x)
            return du

        return cls(dimension=m, rhs=rhs, x0=x0, u0=u0)


def _initial_step(f, t0: float, y0: np.ndarray, span: float,
                  rtol: float, atol: float) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = np.linalg.norm(y0 / scale)
    d1 = np.linalg.norm(np.asarray(f(t0, y0)) / scale)
    if d0 > 1e-5 and d1 > 1e-5:
        return min(0.01 * d0 / d1, span)
    return 1e-6 * span


def rk45_solve(sys: FirstOrderSystem, span: tuple[float, float],
               rtol: float, atol: float) -> tuple[np.ndarray, np.ndarray]:
    """Adaptive Dormand-Prince 5(4) integration over the span.

    Elementary step-size controller: scaled RMS error norm, safety factor
    0.9, step-change factors clamped to [0.2, 5]. Returns the accepted-step
    abscissae and the state at each (rows correspond to abscissae).
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")
    t0, t1 = float(span[0]), float(span[1])
    f = sys.rhs
    y = np.array(sys.u0, dtype=np.float64)
    h = _initial_step(f, t0, y, t1 - t0, rtol, atol)
    ts = [t0]
    ys = [y.copy()]
    t = t0
    k = np.zeros((7, y.size))
    h_floor = 16 * np.finfo(np.float64).eps * max(abs(t0), abs(t1))
    for _ in range(_MAX_STEPS):
        if t >= t1:
            return np.array(ts), np.array(ys)
        h = min(h, t1 - t)
        if h < h_floor:
            raise StiffnessFailure(f"step size underflow near x={t!r}")
        k[0] = f(t, y)
        for i in range(1, 7):
            yi = y + h * sum(_A[i][j] * k[j] for j in range(i))
            k[i] = f(t + _C[i] * h, yi)
        y_new = y + h * (_B5 @ k)
        err_vec = h * (_ERR @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if err <= 1.0:
            t += h
            y = y_new
            ts.append(t)
            ys.append(y.copy())
        factor = 0.9 * err ** -0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
    raise StiffnessFailure(f"no convergence within {_MAX_STEPS} steps")


def measurement_nodes(sys: FirstOrderSystem, span: tuple[float, float], n: int,
                      rtol: float = 1e-3, atol: float = 1e-6) -> NodeGrid:
    """Synthesize n abscissae shaped like production variable-step output.

    Runs the 5(4) pair with the controller discipline of widely deployed
    engineering solvers (per-component error against max(|y|, atol/rtol),
    acceptance at err <= rtol, safety 0.8, growth limit 5, shrink limit 0.1),
    linearly refines each accepted step into four output intervals, then
    resamples the output sequence by index to exactly n nodes. This mirrors
    the node density a measurement campaign driven by such a solver yields.
    """
    t0, t1 = float(span[0]), float(span[1])
    f = sys.rhs
    y = np.array(sys.u0, dtype=np.float64)
    thr = atol / rtol
    hmax = (t1 - t0) / 10
    f0 = np.asarray(f(t0, y))
    rh = float(np.max(np.abs(f0) / np.maximum(np.abs(y), thr))) / (0.8 * rtol ** 0.2)
    h = min(hmax, t1 - t0)
    if h * rh > 1:
        h = 1 / rh
    ts = [t0]
    t = t0
    k = np.zeros((7, y.size))
    for _ in range(_MAX_STEPS):
        if t >= t1:
            break
        h = min(h, t1 - t)
        k[0] = f(t, y)
        for i in range(1, 7):
            yi = y + h * sum(_A[i][j] * k[j] for j in range(i))
            k[i] = f(t + _C[i] * h, yi)
        y_new = y + h * (_B5 @ k)
        err_vec = h * (_ERR @ k)
        scale = np.maximum(np.maximum(np.abs(y), np.abs(y_new)), thr)
        err = float(np.max(np.abs(err_vec / scale)))
        if err <= rtol:
            t += h
            y = y_new
            ts.append(t)
            h *= min(5.0, max(0.1, 0.8 * (rtol / err) ** 0.2)) if err > 0 else 5.0
        else:
            h *= max(0.1, 0.8 * (rtol / err) ** 0.2)
    else:
        raise StiffnessFailure("node synthesis did not reach the interval end")

    refined = [ts[0]]
    for a, b in zip(ts[:-1], ts[1:]):
        refined.extend(a + (b - a) * i / 4 for i in (1, 2, 3, 4))
    refined = np.array(refined)
    idx = np.linspace(0, refined.size - 1, n)
    return NodeGrid(np.interp(idx, np.arange(refined.size), refined))


# ---------------------------------------------------------------------------
# benchmark problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestProblem:
    """A fully specified benchmark: ODE, constraints, analytic solution."""

    name: str
    ode: OdeSpec
    constraints: tuple[Constraint, ...]
    analytic: Expression
    default_n: int
    default_ls: int
    grid_mode: str = "uniform"  # "uniform" or "rk45"

    def build_grid(self, n: int | None = None, grid_mode: str | None = None) -> NodeGrid:
        n = n or self.default_n
        mode = grid_mode or self.grid_mode
        lo, hi = self.ode.interval
        if mode == "uniform":
            return NodeGrid.uniform(n, lo, hi)
        if mode == "rk45":
            sys = FirstOrderSystem.from_ode(self.ode, self.constraints)
            return measurement_nodes(sys, (lo, hi), n)
        raise ValueError(f"unknown grid mode {mode!r}")


# Degree-8 synthetic test function for the gradient-reconstruction problem.
# Nominal coefficients (highest power first) are adjusted by the minimum-norm
# correction that makes the four pinned conditions hold exactly:
# y(0.7895) = 0, y(1) = -0.1, y'(0) = 1, y'(1) = 0.
_OCTIC_NOMINAL = np.array([-0.46985, 0.41127, 0.34891, 0.03827,
                           1.0323, -1.5886, -0.88426, 1.0, 0.011895])
_OCTIC_CONDITIONS = ((0, 0.7895, 0.0), (0, 1.0, -0.1), (1, 0.0, 1.0), (1, 1.0, 0.0))


def _poly_condition_matrix(conditions, degree: int = 8) -> np.ndarray:
    rows = np.zeros((len(conditions), degree + 1))
    for r, (order, xc, _) in enumerate(conditions):
        for k in range(degree + 1):
            power = degree - k
            if power >= order:
                fac = 1.0
                for j in range(order):
                    fac *= power - j
                rows[r, k] = fac * xc ** (power - order)
    return rows


def constrained_octic() -> np.ndarray:
    """Coefficients (highest power first) of the pinned degree-8 polynomial."""
    a = _poly_condition_matrix(_OCTIC_CONDITIONS)
    d = np.array([c[2] for c in _OCTIC_CONDITIONS])
    resid = d - a @ _OCTIC_NOMINAL
    return _OCTIC_NOMINAL + a.T @ np.linalg.solve(a @ a.T, resid)


def _poly_expr_text(coeffs: np.ndarray) -> str:
    degree = coeffs.size - 1
    terms = []
    for k, c in enumerate(coeffs):
        power = degree - k
        lit = format(float(c), ".17g")
        if power == 0:
            terms.append(f"({lit})")
        elif power == 1:
            terms.append(f"({lit})*x")
        else:
            terms.append(f"({lit})*x^{power}")
    return " + ".join(terms)


def _make_test_a(name: str, interval, n: int, ls: int, grid_mode: str) -> TestProblem:
    return TestProblem(
        name=name,
        ode=OdeSpec.from_strings(3, ["1", "3", "3", "1"], interval, "30*exp(-x)"),
        constraints=(Constraint(0, 0.0, 3.0),
                     Constraint(1, 0.0, -3.0),
                     Constraint(2, 0.0, -47.0)),
        analytic=parse("(3 - 25*x^2 + 5*x^3)*exp(-x)"),
        default_n=n, default_ls=ls, grid_mode=grid_mode)


def _make_test_c() -> TestProblem:
    return TestProblem(
        name="testC",
        ode=OdeSpec.from_strings(2, ["-2", "-x", "2*x^2"], (1.0, 10.0), "0"),
        constraints=(Constraint(0, 1.0, 5.0), Constraint(1, 1.0, 0.0)),
        analytic=parse("x^2 + 4/sqrt(x)"),
        default_n=69, default_ls=15)


def _make_test_e() -> TestProblem:
    coeffs = constrained_octic()
    deriv = np.polyder(coeffs)
    return TestProblem(
        name="testE",
        ode=OdeSpec.from_strings(1, ["0", "1"], (0.0, 1.0),
                                 _poly_expr_text(deriv)),
        constraints=tuple(Constraint(o, x, v) for o, x, v in _OCTIC_CONDITIONS),
        analytic=parse(_poly_expr_text(coeffs)),
        default_n=21, default_ls=9)


def problems() -> dict[str, TestProblem]:
    """Registry of the shipped benchmark problems."""
    return {
        "testA": _make_test_a("testA", (0.0, 8.0), 77, 9, "rk45"),
        "testB": _make_test_a("testB", (0.0, 8.0), 20, 9, "uniform"),
        "testC": _make_test_c(),
        "testE": _make_test_e(),
        "testA_pil": _make_test_a("testA_pil", (0.0, 0.1), 10, 5, "uniform"),
    }


# ---------------------------------------------------------------------------
# experiment harnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Report:
    """Accuracy and timing of one full pipeline run."""

    name: str
    n: int
    ls: int
    grid_mode: str
    error_2norm: float
    relative_error: float
    error_vector: np.ndarray = field(repr=False)
    timing: dict = field(default_factory=dict)


def prepare_problem(tp: TestProblem, n: int | None = None,
                    ls: int | None = None, grid_mode: str | None = None,
                    allow_rank_deficient: bool = False
                    ) -> tuple[PreparedSolver, NodeGrid, np.ndarray, np.ndarray]:
    """Build grid, assemble, compile and prepare one benchmark problem.

    Returns (prepared solver, grid, forcing samples, analytic samples).
    """
    n = n or tp.default_n
    ls = ls or tp.default_ls
    grid = tp.build_grid(n, grid_mode)
    op = assemble_operator(tp.ode, grid, ls)
    cs = compile_constraints(grid, tp.constraints, ls)
    ps = prepare(op, compute_basis(cs),
                 allow_rank_deficient=allow_rank_deficient)
    g = eval_vector(tp.ode.forcing, grid)
    ya = eval_vector(tp.analytic, grid)
    return ps, grid, g, ya


def run_test_problem(tp: TestProblem, n: int | None = None,
                     ls: int | None = None,
                     grid_mode: str | None = None,
                     allow_rank_deficient: bool = False) -> Report:
    """Solve the problem against analytically sampled forcing and compare."""
    n = n or tp.default_n
    ls = ls or tp.default_ls
    mode = grid_mode or tp.grid_mode
    t0 = time.perf_counter()
    ps, grid, g, ya = prepare_problem(tp, n, ls, mode, allow_rank_deficient)
    t1 = time.perf_counter()
    y = solve(ps, g)
    t2 = time.perf_counter()
    err = y - ya
    norm = float(np.linalg.norm(err))
    return Report(name=tp.name, n=n, ls=ls, grid_mode=mode,
                  error_2norm=norm,
                  relative_error=norm / float(np.linalg.norm(ya)),
                  error_vector=err,
                  timing={"prepare_s": t1 - t0, "solve_s": t2 - t1})


def support_sweep(tp: TestProblem, n: int | None = None,
                  supports=range(3, 26, 2)) -> list[tuple[int, float]]:
    """Relative solution error for each candidate support length.

    Borderline rank-deficient supports are solved in minimum-norm mode so
    the study stays comparable across the whole range; their (large) errors
    disqualify them on merit rather than by exception.
    """
    return [(ls, run_test_problem(tp, n=n, ls=ls,
                                  allow_rank_deficient=True).relative_error)
            for ls in supports]


@dataclass(frozen=True)
class MonteCarloResult:
    bias: np.ndarray
    sample_sigma: np.ndarray
    predicted_sigma: np.ndarray
    mean: np.ndarray
    analytic: np.ndarray
    sigma_g: float
    iterations: int
    seed: int


def default_noise_sigma(tp: TestProblem, grid: NodeGrid) -> float:
    """Noise convention for the gradient studies: 1% of the peak forcing."""
    return 0.01 * float(np.max(np.abs(eval_vector(tp.ode.forcing, grid))))


def monte_carlo(tp: TestProblem, n: int | None = None, ls: int | None = None,
                sigma: float | None = None, k: int = 10_000,
                seed: int = 1) -> MonteCarloResult:
    """Perturb the analytic forcing k times and aggregate reconstructions.

    Aggregation is chunked but deterministic: a fixed chunk size and a fixed
    reduction order make equal seeds produce bitwise equal outputs.
    """
    if k < 100:
        raise ValueError("k must be >= 100")
    ps, grid, g, ya = prepare_problem(tp, n, ls)
    if sigma is None:
        sigma = default_noise_sigma(tp, grid)
    rng = np.random.default_rng(seed)
    nn = grid.n
    chunk = 512
    sum_dev = np.zeros(nn)
    sum_dev2 = np.zeros(nn)
    done = 0
    while done < k:
        m = min(chunk, k - done)
        noise = rng.standard_normal((m, nn))
        ys = (g + sigma * noise) @ ps.M.T + ps.y_h
        dev = ys - ya
        sum_dev += dev.sum(axis=0)
        sum_dev2 += (dev * dev).sum(axis=0)
        done += m
    mean_dev = sum_dev / k
    var = (sum_dev2 - k * mean_dev * mean_dev) / (k - 1)
    return MonteCarloResult(
        bias=mean_dev,
        sample_sigma=np.sqrt(np.maximum(var, 0.0)),
        predicted_sigma=propagate_covariance(ps, sigma),
        mean=ya + mean_dev,
        analytic=ya,
        sigma_g=float(sigma),
        iterations=k,
        seed=seed,
    )
