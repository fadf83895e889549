"""Exception hierarchy shared across the package."""


class JumpSdeError(Exception):
    """Base class for all package errors."""


class ParseError(JumpSdeError):
    """Syntax or semantic error in an expression or config source."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class EvalDomainError(JumpSdeError):
    """Real-arithmetic domain violation (log of non-positive, division by
    zero, sqrt of negative, zero to a negative power)."""

    def __init__(self, message: str, subexpr: str | None = None):
        self.subexpr = subexpr
        if subexpr is not None:
            message = f"{message} in subexpression `{subexpr}`"
        super().__init__(message)


class NonSmoothPointError(JumpSdeError):
    """Jet requested at a point where the expression is not differentiable
    to the requested order (piecewise breakpoint)."""


class JetOrderError(JumpSdeError):
    """Jet operands disagree in truncation order or base point."""


class NonFiniteStateError(JumpSdeError):
    """An integrator state overflowed or became NaN."""


class MissingReferenceError(JumpSdeError):
    """A reference solution was required but the model carries none."""


class ValidationError(JumpSdeError):
    """Invariant violation in a config or domain object."""


class SimulationError(JumpSdeError):
    """Runtime failure inside a path simulation, annotated with context."""
