"""Exception hierarchy.  Every error maps to CLI exit code 1."""


class DriftGeomError(Exception):
    pass


class UsageError(DriftGeomError, ValueError):
    pass


class DomainError(DriftGeomError, ValueError):
    """A point lies outside (or too close to the edge of) a chart domain or stencil."""


class GeometryError(DriftGeomError):
    """The metric is not symmetric positive definite where it was queried."""


class NumericError(DriftGeomError):
    """A quadrature or iteration ran out of budget."""


class NonConvergenceError(NumericError):
    def __init__(self, message, last_iterate=None, history=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.history = history or []


class PositivityError(DriftGeomError):
    pass


class ComparisonUnavailable(DriftGeomError):
    pass


class TruncatedPathError(DriftGeomError):
    def __init__(self, message, partial_path=None):
        super().__init__(message)
        self.partial_path = partial_path


class ConfigError(UsageError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
