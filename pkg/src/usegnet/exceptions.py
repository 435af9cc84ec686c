"""Exception classes for the usegnet package."""

from typing import Any, Dict, Optional


class USegNetError(Exception):
    """Base exception for all usegnet errors."""

    exit_code = 2

    def __init__(self, message: str):
        """Initialize USegNetError.

        Args:
            message: Error message
        """
        super().__init__(message)
        self.message = message


class ValidationError(USegNetError):
    """Exception raised for invalid argument values."""

    exit_code = 1


class ConfigError(ValidationError):
    """Exception raised for unknown or invalid configuration keys."""

    def __init__(self, message: str, key: Optional[str] = None):
        """Initialize ConfigError.

        Args:
            message: Error message
            key: The offending configuration key
        """
        super().__init__(message)
        self.key = key


class ShapeError(USegNetError):
    """Exception raised when tensor or volume shapes disagree."""

    pass


class StateError(USegNetError):
    """Exception raised when an operation runs against missing or corrupted state."""

    exit_code = 3


class NumericalError(USegNetError):
    """Exception raised when non-finite values appear."""

    exit_code = 3

    def __init__(
        self,
        message: str,
        layer_id: Optional[str] = None,
        diagnostics: Optional[Dict[str, Any]] = None,
    ):
        """Initialize NumericalError.

        Args:
            message: Error message
            layer_id: Id of the layer that produced the non-finite values
            diagnostics: Optional context (epoch, batch, parameter norms)
        """
        super().__init__(message)
        self.layer_id = layer_id
        self.diagnostics = diagnostics or {}


class DataError(USegNetError):
    """Exception raised for unreadable or inconsistent volume data."""

    pass


class NiftiMagicError(DataError):
    """Exception raised when a NIfTI-1 header lacks the n+1/ni1 magic."""

    pass


class UnsupportedDatatypeError(DataError):
    """Exception raised for NIfTI datatypes outside u8/i16/f32/f64."""

    def __init__(self, message: str, datatype: Optional[int] = None):
        """Initialize UnsupportedDatatypeError.

        Args:
            message: Error message
            datatype: The NIfTI datatype code found in the header
        """
        super().__init__(message)
        self.datatype = datatype


class TruncatedPayloadError(DataError):
    """Exception raised when a file ends before its declared payload."""

    pass


class PayloadLengthError(DataError):
    """Exception raised when a raw file length disagrees with its dims."""

    def __init__(self, message: str, expected: int, actual: int):
        """Initialize PayloadLengthError.

        Args:
            message: Error message
            expected: Expected payload size in bytes
            actual: Actual file size in bytes
        """
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class LabelConventionError(DataError):
    """Exception raised when a label convention is undeclared or mismatched."""

    pass


class CheckpointError(USegNetError):
    """Exception raised for unreadable checkpoints."""

    pass


class CheckpointFormatError(CheckpointError):
    """Exception raised for bad magic, unknown version or truncated checkpoints."""

    pass


class FingerprintMismatchError(CheckpointError):
    """Exception raised when a checkpoint was written by a different topology."""

    def __init__(self, message: str, expected: int, found: int):
        """Initialize FingerprintMismatchError.

        Args:
            message: Error message
            expected: Fingerprint of the receiving graph
            found: Fingerprint stored in the checkpoint
        """
        super().__init__(message)
        self.expected = expected
        self.found = found
