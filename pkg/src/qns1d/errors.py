"""Exception hierarchy shared by every module of the package."""


class QNSError(Exception):
    """Base class for all errors raised by qns1d."""


class DomainError(QNSError, ValueError):
    """A scalar or nodal input lies outside the admissible domain (e.g. v <= 0)."""


class StateError(DomainError):
    """A state handed to a right-hand side violates positivity."""


class RegimeError(QNSError, ValueError):
    """The requested operation needs eps <= nu but the parameters are dispersive."""


class ConfigError(QNSError, ValueError):
    """Invalid configuration; ``line`` is the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StepError(QNSError, RuntimeError):
    """A Runge-Kutta stage dropped below the positivity floor."""

    def __init__(self, message, node=None, time=None, v_min=None):
        self.node = node
        self.time = time
        self.v_min = v_min
        super().__init__(message)


class StudyError(QNSError, RuntimeError):
    """One run of a parameter study failed; ``eps`` names it."""

    def __init__(self, message, eps=None):
        self.eps = eps
        super().__init__(message)


class DegenerateDataError(QNSError, ValueError):
    """Rate fitting received non-positive errors or too few points."""
