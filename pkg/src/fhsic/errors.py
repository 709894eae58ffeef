"""Exception types raised by fhsic."""


class FhsicError(Exception):
    """Base class for all fhsic errors."""


class DimensionError(FhsicError, ValueError):
    """Shapes or sample sizes do not agree."""


class DomainError(FhsicError, ValueError):
    """A value lies outside the domain an operation accepts."""


class CurveFormatError(FhsicError, ValueError):
    """A curve file is malformed (ragged rows, non-numeric cells)."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        super().__init__(message)


class ReplicateError(FhsicError):
    """A Monte Carlo replicate failed; carries its index."""

    def __init__(self, replicate_index, cause):
        super().__init__(replicate_index, cause)
        self.replicate_index = replicate_index
        self.cause = cause

    def __str__(self):
        return f"replicate {self.replicate_index}: {self.cause}"
