class OrliczError(Exception):
    """Base class for errors raised by this package."""


class ExtrapolationError(OrliczError, ValueError):
    """A tabulated nonlinearity was queried outside its knot range."""


class QuadratureError(OrliczError, ArithmeticError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NumericError(OrliczError, ArithmeticError):
    pass


class DomainError(OrliczError, ValueError):
    pass


class ContractViolation(OrliczError, ValueError):
    pass


class ShapeError(OrliczError, ValueError):
    pass


class GeometryError(OrliczError, ValueError):
    pass


class CapacityError(OrliczError, ValueError):
    def __init__(self, message, max_k):
        super().__init__(message)
        self.max_k = max_k


class ConvergenceError(OrliczError, RuntimeError):
    """Descent stopped without meeting the residual tolerance."""

    def __init__(self, message, *, iterate=None, residual=None, iterations=None, reason=""):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
        self.iterations = iterations
        self.reason = reason


class ConfigError(OrliczError, ValueError):
    pass
