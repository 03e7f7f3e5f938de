"""Heat kernels, spherical functions and sup-norm bounds on the Siegel upper half-space."""
__version__ = "0.1.0"

from .errors import (AccuracyError, AccuracyWarning, ConvergenceError, DimensionError, DomainError,
                     NumericalError, ParameterRangeError, PrecisionWarning, SiegelHeatError,
                     StepSizeError, TruncationError, ValidationError)
from .integration import QuadratureSpec
from .symplectic_core import RadialVector, SiegelPoint, SymplecticMatrix

__all__ = [
    "__version__", "QuadratureSpec", "RadialVector", "SiegelPoint", "SymplecticMatrix",
    "AccuracyError", "AccuracyWarning", "ConvergenceError", "DimensionError", "DomainError",
    "NumericalError", "ParameterRangeError", "PrecisionWarning", "SiegelHeatError",
    "StepSizeError", "TruncationError", "ValidationError",
]
