"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, DataError 2,
ModelFormatError 3.
"""


class AirsignError(Exception):
    """Base class for all package errors."""


class ValidationError(AirsignError, ValueError):
    """Malformed input: bad landmark frame, out-of-range pixel, bad message."""


class StateError(AirsignError, RuntimeError):
    """Operation invoked on an object in the wrong state."""


class EmptySignatureError(AirsignError):
    """A signature was requested from a canvas with no ink."""


class ShapeError(AirsignError, ValueError):
    """Tensor shapes incompatible with the requested operation."""


class DataError(AirsignError):
    """Dataset problems: unreadable tree, unusable signer, empty pair set."""


class ModelFormatError(AirsignError):
    """Model container file is corrupt, truncated, or version-incompatible."""
