"""Exception types shared by every module.

The CLI maps each family onto a fixed exit code, see ``dequip.cli``.
"""

from __future__ import annotations


class DequipError(Exception):
    """Base class for all library errors."""


class ValidationError(DequipError, ValueError):
    """An argument violates a documented precondition."""


class FormatError(DequipError, ValueError):
    """Malformed or unsupported file content."""


class BoundsError(ValidationError, IndexError):
    """A patch does not fit inside the image."""


class CoverageError(ValidationError):
    """Some output pixel is not covered by any patch."""


class NumericalError(DequipError, ArithmeticError):
    """An eigensolver failed to converge.

    Attributes:
        residual: best residual reached before giving up, if known.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class SingularityError(NumericalError):
    """A fitted rule was evaluated too close to its pole."""


class CapacityError(DequipError):
    """Problem exceeds the dense-solver size cap."""


class ConstantsLookupError(DequipError, KeyError):
    """No fit-constant row for the requested (noise model, patch side)."""

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""
