"""invode: precompiled real-time solvers for constrained linear ODE inverse problems.

Offline, a linear ODE with generalized value/derivative constraints is folded
into the frozen triple (M, y_h, s); at run time each measurement vector g is
solved by the single expression y = M g + y_h with per-node uncertainty
sigma_g * s. Dependency-free C99 kernels can be emitted for embedded targets.
"""

from .artifact import load as load_artifact
from .artifact import save as save_artifact
from .codegen import EmitConfig, emit_c, emit_harness, emit_test_vectors
from .constraints import (
    Constraint,
    ConstraintBasis,
    ConstraintSet,
    WellPosedReport,
    check_well_posed,
    compile_constraints,
    compute_basis,
)
from .errors import ToolkitError
from .expressions import Expression, eval_vector, parse
from .operators import LinearOperator, OdeSpec, assemble_operator
from .reference import (
    FirstOrderSystem,
    TestProblem,
    monte_carlo,
    problems,
    rk45_solve,
    run_test_problem,
    support_sweep,
)
from .solver import (
    PreparedSolver,
    Solution,
    full_solution,
    prepare,
    propagate_covariance,
    propagate_covariance_full,
    residual,
    solve,
    solve_counted,
    with_constraint_values,
)
from .stats import confidence_interval, ks_gaussian_test, student_t_quantile
from .stencils import (
    DiffMatrix,
    NodeGrid,
    StencilWeights,
    build_diff_matrix,
    fd_weights,
)

__version__ = "0.1.0"

__all__ = [
    "Constraint", "ConstraintBasis", "ConstraintSet", "DiffMatrix",
    "EmitConfig", "Expression", "FirstOrderSystem", "LinearOperator",
    "NodeGrid", "OdeSpec", "PreparedSolver", "Solution", "StencilWeights",
    "TestProblem", "ToolkitError", "WellPosedReport", "assemble_operator",
    "build_diff_matrix", "check_well_posed", "compile_constraints",
    "compute_basis", "confidence_interval", "emit_c", "emit_harness",
    "emit_test_vectors", "eval_vector", "fd_weights", "full_solution",
    "ks_gaussian_test", "load_artifact", "monte_carlo", "parse", "prepare",
    "problems", "propagate_covariance", "propagate_covariance_full",
    "residual", "rk45_solve", "run_test_problem", "save_artifact", "solve",
    "solve_counted", "student_t_quantile", "support_sweep",
    "with_constraint_values",
]
