"""Exception types shared across the package.

Every error derives from :class:`QTSPError`; the CLI maps the subclasses
onto its exit codes.
"""


class QTSPError(Exception):
    """Base class for all package errors."""


class InvalidCodeError(QTSPError, ValueError):
    pass


class InvalidPermutationError(QTSPError, ValueError):
    pass


class SizeLimitError(QTSPError, ValueError):
    """Problem size exceeds an enumeration or solver limit."""


class OutOfRangeError(QTSPError, ValueError):
    """A rank, position, interval or length falls outside its valid range."""


class DimensionError(QTSPError, ValueError):
    pass


class DegenerateInstanceError(QTSPError, ValueError):
    pass


class DepthError(QTSPError, ValueError):
    """Wave state is at the wrong depth for the requested operation."""


class DegenerateFitError(QTSPError, ValueError):
    pass


class UsageError(QTSPError, ValueError):
    pass


class SearchFailureError(QTSPError, RuntimeError):
    """The range search could not produce a tour.

    ``bin_index`` is the bin that answered yes, or None if none did.
    """

    def __init__(self, message: str, bin_index: int | None = None):
        super().__init__(message)
        self.bin_index = bin_index


class InstanceFormatError(QTSPError, ValueError):
    """Malformed instance file."""


class UnsupportedFormatError(InstanceFormatError):
    pass
