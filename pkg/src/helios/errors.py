"""Exception hierarchy shared by every helios module."""

from __future__ import annotations


class HeliosError(Exception):
    """Base class for all errors raised by helios."""


class DomainError(HeliosError, ValueError):
    """A value lies outside its admissible domain."""


class SizeError(DomainError):
    """A sequence is too short (or otherwise mis-sized)."""


class SpacingError(DomainError):
    """Time stamps or step lengths are not uniform / not compatible."""


class DegenerateError(DomainError):
    """An operation is undefined for the input (e.g. an all-zero profile)."""


class StateError(HeliosError, RuntimeError):
    """An object is in the wrong lifecycle state for the requested call."""


class VarReferenceError(HeliosError, KeyError):
    """A variable id does not exist in the model, or is missing from an assignment."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class IntegralityError(HeliosError, ValueError):
    """A binary variable carries a value that is not within tolerance of 0 or 1."""


class SolverError(HeliosError, RuntimeError):
    """The LP engine failed numerically."""


class SeedRejected(HeliosError, ValueError):
    """A warm-start assignment is infeasible; ``violations`` names the offending rows."""

    def __init__(self, message: str, violations: list[str]):
        super().__init__(message)
        self.violations = violations


class ParseError(HeliosError, ValueError):
    """A file does not match its documented schema."""
