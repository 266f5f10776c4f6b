"""Exception types shared across the toolkit."""


class HullKitError(Exception):
    """Base class for all toolkit errors."""


class InvalidParamsError(HullKitError):
    """Parameter vector is structurally invalid (wrong length, non-finite)."""


class InfeasibleHullError(HullKitError):
    """Operation requires a feasible hull but the constraint check failed."""


class DomainError(HullKitError):
    """Query outside the valid domain (envelope, draft, interpolation grid)."""


class ParseError(HullKitError):
    """Malformed input file; carries row/column context where available."""


class SamplingError(HullKitError):
    """Rejection sampling exhausted its attempt budget."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


class ModelFormatError(HullKitError):
    """Surrogate model file has a bad magic number, version, or checksum."""
