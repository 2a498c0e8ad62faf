"""Exception hierarchy shared by every module."""


class LoewnerLabError(Exception):
    """Base class for all package errors."""


class NotHermitianError(LoewnerLabError, ValueError):
    pass


class DimensionError(LoewnerLabError, ValueError):
    pass


class ConvergenceError(LoewnerLabError, ArithmeticError):
    """Iterative eigensolver ran out of sweeps.

    ``residual`` is the off-diagonal Frobenius mass left when it gave up.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DomainError(LoewnerLabError, ValueError):
    """A value fell outside the domain of a function."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class PositivityError(LoewnerLabError, ValueError):
    """A matrix required to be positive (semi)definite is not."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class ParameterError(LoewnerLabError, ValueError):
    pass


class ConstraintError(ParameterError):
    """Stated hypotheses on (q, m, M) are violated."""


class ApproximationError(LoewnerLabError, ArithmeticError):
    """Polynomial approximation did not reach the requested accuracy."""

    def __init__(self, message, best_delta=None, degree=None):
        super().__init__(message)
        self.best_delta = best_delta
        self.degree = degree


class AssumptionError(LoewnerLabError, ValueError):
    """An operator-level hypothesis of a bound is not met.

    ``measure`` carries the quantity that was checked (a min eigenvalue,
    a commutator norm, ...).
    """

    def __init__(self, message, measure=None):
        super().__init__(message)
        self.measure = measure


class ExpressionSyntaxError(LoewnerLabError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(LoewnerLabError, ValueError):
    def __init__(self, name, offset=None):
        where = "" if offset is None else f" at offset {offset}"
        super().__init__(f"unknown identifier {name!r}{where}")
        self.name = name
        self.offset = offset


class ConfigError(LoewnerLabError, ValueError):
    pass
