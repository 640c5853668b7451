"""Exception types raised across the package."""


class MemdriftError(Exception):
    """Base class for all package errors."""


class InvalidGridError(MemdriftError, ValueError):
    pass


class InvalidConfigError(MemdriftError, ValueError):
    pass


class InvalidEdgeError(MemdriftError, ValueError):
    pass


class AssemblyError(MemdriftError, ValueError):
    pass


class LinearSolveError(MemdriftError, RuntimeError):
    pass


class NewtonError(MemdriftError, RuntimeError):
    """Newton iteration failed to converge.

    Carries the final residual max-norm so that callers (e.g. the time
    stepper) can decide whether to retry with a smaller step.
    """

    def __init__(self, message, residual_norm=None, iterations=None):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class StepError(MemdriftError, RuntimeError):
    """Implicit Euler step failed after exhausting the halving budget."""

    def __init__(self, message, t_target=None, dt=None, residual_norm=None):
        super().__init__(message)
        self.t_target = t_target
        self.dt = dt
        self.residual_norm = residual_norm


class StationarySolveError(MemdriftError, RuntimeError):
    pass


class DiagnosticError(MemdriftError, ValueError):
    pass


class ComparisonError(MemdriftError, ValueError):
    pass


class ConfigError(MemdriftError, ValueError):
    """Config file problem; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(MemdriftError, ValueError):
    pass
