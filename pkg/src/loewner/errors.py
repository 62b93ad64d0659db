"""Exception hierarchy shared by every module."""


class LoewnerError(Exception):
    """Base class for all errors raised by the package."""


class ExprSyntaxError(LoewnerError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExprNameError(LoewnerError):
    """Unknown identifier, or ``t`` used in a one-argument expression."""


class EvaluationError(LoewnerError, ArithmeticError):
    """Division by zero, branch point hit, or a non-finite result."""


class DomainError(LoewnerError, ValueError):
    """A point or contour leaves the region where an operation is defined."""


class ConvergenceError(LoewnerError):
    """An iterative or adaptive procedure did not converge."""


class CertificationError(LoewnerError):
    """A vector field failed the sampled Berkson-Porta certificate.

    ``t`` is the frozen time (``None`` for autonomous input) and ``z`` the
    grid point where the check failed.
    """

    def __init__(self, message, t=None, z=None):
        super().__init__(message)
        self.t = t
        self.z = z


class PreconditionError(LoewnerError, ValueError):
    pass


class ConfigError(LoewnerError):
    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason
