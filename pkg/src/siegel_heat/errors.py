"""Exception hierarchy.

Validation problems map to CLI exit code 2, numerical failures to exit code 3.
"""


class SiegelHeatError(Exception):
    exit_code = 1


class ValidationError(SiegelHeatError, ValueError):
    exit_code = 2


class DomainError(ValidationError):
    """Input outside the domain of the operation (not in H_n, not symplectic, ...)."""


class DimensionError(ValidationError):
    pass


class ParameterRangeError(ValidationError):
    pass


class NumericalError(SiegelHeatError, ArithmeticError):
    exit_code = 3


class ConvergenceError(NumericalError):
    pass


class StepSizeError(NumericalError):
    pass


class TruncationError(NumericalError):
    pass


class AccuracyError(NumericalError):
    pass


class AccuracyWarning(UserWarning):
    pass


class PrecisionWarning(UserWarning):
    pass
