"""Exception hierarchy shared by all rwlab modules."""

from __future__ import annotations


class RWLabError(Exception):
    """Base class for every error raised by rwlab."""


class DomainError(RWLabError, ValueError):
    """A point lies outside the warping interval or the base chart."""


class InvalidInputError(RWLabError, ValueError):
    """Malformed argument (zero vector, non-orthonormal frame, bad catalog entry)."""


class ParameterDomainError(RWLabError, ValueError):
    """Family parameters violate an admissibility constraint.

    ``constraint`` names the violated condition so callers (and the CLI) can
    report it verbatim.
    """

    def __init__(self, message: str, constraint: str = "", where: float | None = None):
        super().__init__(message)
        self.constraint = constraint
        self.where = where


class CausalDegeneracyError(RWLabError, ArithmeticError):
    """Induced metric is not positive definite (the patch is not space-like)."""


class DegenerateFrameError(RWLabError, ArithmeticError):
    """Adapted frame undefined: -1 + f^2 E is at or below the guard."""


class SliceSurfaceError(DegenerateFrameError):
    """Tangential part of d/dt vanishes: the surface sits in a time slice."""


class JetError(RWLabError, ValueError):
    """Finite-difference stencil would leave the patch domain."""
