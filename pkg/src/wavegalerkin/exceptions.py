"""Exception types raised by wavegalerkin."""


class ValidationError(ValueError):
    """Invalid input: malformed filter, bad grid size, out-of-range parameter."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to converge or its diagnostics look wrong."""


class NotAnEigenvalueError(ValidationError):
    """The requested value is provably not an eigenvalue of the operator."""
