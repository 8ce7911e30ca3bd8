"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the admissible region of an operation."""


class ConvergenceError(RuntimeError):
    """An iterative computation failed to converge; never silently ignored."""


class BracketError(RuntimeError):
    """A bisection bracket could not be established or is degenerate."""


class NoBoundStateError(RuntimeError):
    """The discretized eigenproblem resolved no eigenvalue below the
    essential-spectrum proxy; the requested bound state does not exist at
    this resolution."""
