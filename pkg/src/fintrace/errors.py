"""Exception types raised by the engine."""

from __future__ import annotations


class FintraceError(Exception):
    """Base class for engine errors."""


class DimensionError(FintraceError):
    """Unsupported dimension or mismatched dimensions."""


class ThresholdError(FintraceError):
    """Truncation index N below the Re(order) + n - 1 threshold."""


class AccuracyError(FintraceError):
    """A tail bound or fit residual exceeded its tolerance."""


class NonCriticalOrderError(FintraceError):
    """The order path is critical (alpha'(z0) = 0) where it must not be."""


class NonIntegerOrderError(FintraceError):
    """Parity classification requested for a non-integer order symbol."""


class UnsupportedModelError(FintraceError):
    """Operation requires an invertible model or declared kernel data."""


class PoleError(FintraceError):
    """Evaluation requested at a pole; carries the residue when known."""

    def __init__(self, message: str, location: complex, residue: complex | None = None):
        super().__init__(message)
        self.location = location
        self.residue = residue


class ConfigError(FintraceError):
    """Malformed run configuration."""
