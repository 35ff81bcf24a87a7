"""Exception types raised by the laboratory.

Every error derives from :class:`MuHSError` so callers (and the CLI) can map
failures onto exit codes with a single ``except``.
"""


class MuHSError(Exception):
    """Base class for all package errors."""


class InvalidInput(MuHSError, ValueError):
    """Malformed or out-of-range input (CLI exit code 2)."""


class ParseError(InvalidInput):
    """Initial-condition text does not match the grammar."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class PreconditionError(InvalidInput):
    pass


class InvalidParams(InvalidInput):
    pass


class DegeneratePlane(InvalidInput):
    pass


class NumericalFailure(MuHSError, ArithmeticError):
    """Numerical breakdown (CLI exit code 3)."""


class DomainError(NumericalFailure):
    pass


class NonPositiveMomentum(NumericalFailure):
    pass


class NonPeriodicAntiderivative(NumericalFailure):
    pass


class DiffeomorphismLost(NumericalFailure):
    pass


class ConstraintUnsatisfiable(MuHSError):
    """No wave satisfies the requested constraint (CLI exit code 4)."""


class NonPositiveMean(ConstraintUnsatisfiable):
    pass


class NoBracket(ConstraintUnsatisfiable):
    def __init__(self, message, scanned=None):
        super().__init__(message)
        self.scanned = scanned
