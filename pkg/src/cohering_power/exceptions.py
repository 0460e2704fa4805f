"""Custom exceptions for cohering-power."""

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from cohering_power.models import ValidationReport


class CoheringPowerError(Exception):
    """Base exception for cohering-power."""

    exit_code = 3

    def __init__(self, message: str, exit_code: Optional[int] = None) -> None:
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(self.message)


class DocumentParseError(CoheringPowerError):
    """Raised when a channel or circuit document cannot be read or parsed."""

    exit_code = 1


class ValidationError(CoheringPowerError):
    """Raised when an input fails validation."""

    exit_code = 2


class InvalidMatrixError(ValidationError):
    """Raised when a matrix has the wrong rank or non-finite entries."""


class DimensionMismatchError(ValidationError):
    """Raised when dimensions of matrices, states or operations do not chain."""


class NotHermitianError(ValidationError):
    """Raised when a matrix is not Hermitian within tolerance."""


class InvalidStateError(ValidationError):
    """Raised when a matrix is not a density matrix."""


class NonUnitaryError(ValidationError):
    """Raised when a matrix expected to be unitary is not."""


class SingularMatrixError(ValidationError):
    """Raised when a matrix expected to be invertible is singular."""


class UnsupportedOperationError(ValidationError):
    """Raised when an operation variant is outside a bound's hypothesis."""


class ChannelValidationError(ValidationError):
    """Raised when a quantum operation fails its validation report."""

    def __init__(self, message: str, report: Optional["ValidationReport"] = None) -> None:
        super().__init__(message)
        self.report = report


class NumericalError(CoheringPowerError):
    """Raised on internal numerical failure or a closed-form disagreement."""

    exit_code = 3


class DilationError(NumericalError):
    """Raised when a Stinespring dilation cannot be completed."""
