"""Exception hierarchy for the toolkit.

Every failure mode raised by the library derives from ToolkitError so callers
can catch broadly; the CLI maps subclasses onto its exit-code table.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


# -- stencil / differentiation-matrix construction --------------------------

class DegenerateStencil(ToolkitError):
    """Window nodes are not pairwise distinct."""


class InsufficientSupport(ToolkitError):
    """Requested derivative order needs a longer support window."""


class UnsupportedSupport(ToolkitError):
    """Support length violates the odd-length rule."""


class InsufficientNodes(ToolkitError):
    """Grid has fewer nodes than the requested support length."""


# -- expression parsing / evaluation -----------------------------------------

class ExprSyntaxError(ToolkitError):
    """Malformed expression text; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownSymbol(ToolkitError):
    """Identifier is not a variable, constant or known function."""


class EvalDomainError(ToolkitError):
    """Expression left its real domain (div by zero, sqrt of negative, ...).

    ``node_index`` is set when the failure happened during grid evaluation.
    """

    def __init__(self, message: str, node_index: int | None = None):
        if node_index is not None:
            message = f"{message} (node {node_index})"
        super().__init__(message)
        self.node_index = node_index


# -- operator assembly --------------------------------------------------------

class SingularLeadingCoefficient(ToolkitError):
    """Leading ODE coefficient vanishes at a grid node."""

    def __init__(self, node_index: int, value: float = 0.0):
        super().__init__(
            f"leading coefficient is {value!r} at node {node_index}")
        self.node_index = node_index


# -- constraint compilation ---------------------------------------------------

class ConstraintOutOfRange(ToolkitError):
    """Constraint location falls outside the grid span."""


class DependentConstraints(ToolkitError):
    """Constraint columns are linearly dependent (but consistent)."""


class InconsistentConstraints(ToolkitError):
    """Constraint values are contradictory: d is not in range(C^T)."""


# -- solver -------------------------------------------------------------------

class Underconstrained(ToolkitError):
    """null(L F) is nonempty, so no unique least-squares solution exists."""


class DimensionMismatch(ToolkitError):
    """Vector or matrix size does not match the prepared problem."""


class InvalidMeasurement(ToolkitError):
    """Measurement vector contains NaN or infinity."""


class StaleOperator(ToolkitError):
    """Operator passed for diagnostics is not the one the solver was built from."""


class DegenerateSample(ToolkitError):
    """Sample has zero variance; the normality test is undefined."""


# -- reference baselines --------------------------------------------------------

class StiffnessFailure(ToolkitError):
    """Adaptive integrator step size underflowed."""


# -- code generation ------------------------------------------------------------

class InvalidIdentifier(ToolkitError):
    """Symbol prefix is not a valid C identifier."""
