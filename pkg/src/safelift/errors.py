"""Exception types shared across the package."""


class SafeliftError(Exception):
    """Base class for all package errors."""


class DomainViolation(SafeliftError):
    """A state sits at or beyond the constraint boundary guard band.

    Raised instead of silently producing infinite lifted coordinates, so a
    caller (or the simulator) can diagnose exactly where the guard failed.
    """


class NonFiniteInput(SafeliftError):
    """An input contains NaN or infinity."""


class SingularityDetected(SafeliftError):
    """A lifted gain evaluated to zero or non-finite.

    This means the plant nonsingularity assumptions failed at runtime; the
    value is never clamped or patched over.
    """


class InvalidParams(SafeliftError, ValueError):
    """Construction arguments violate a documented invariant."""


class ConfigError(SafeliftError, ValueError):
    """An experiment configuration failed validation."""


class StepRejected(SafeliftError):
    """An integration step aborted; carries the offending time and cause."""

    def __init__(self, time: float, cause: Exception):
        self.time = time
        self.cause = cause
        super().__init__(f"step rejected at t={time:.6g}: {cause}")
