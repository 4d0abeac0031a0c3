"""Exceptions raised by fsmodel."""

from __future__ import annotations


class FSModelError(RuntimeError):
    """Generic fsmodel error."""


class CDLSyntaxError(FSModelError):
    """Malformed compactum or map description."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class MissingLimit(CDLSyntaxError):
    """A family declaration has no limit clause."""


class EmptyCompactum(CDLSyntaxError):
    """A compactum declares neither a continuum nor a family."""


class UnknownFamily(FSModelError):
    """A map action names a family or continuum the compactum does not declare."""


class InvalidAction(FSModelError):
    """A map action cannot be applied to its target."""


class InvalidDepth(FSModelError):
    """Truncation depth outside the admissible range."""


class InvalidScale(FSModelError):
    """A scale parameter (granularity, epsilon, count) is out of range."""


class InvalidPiece(FSModelError):
    """An instantiated piece is not a valid continuum."""


class MarkerOffGeometry(FSModelError):
    """A subdivision marker does not lie on the geometry being subdivided."""


class NonCoveredCollapse(FSModelError):
    """A collapse element is not covered by atoms of the truncation."""


class NoConnection(FSModelError):
    """Two atom sets lie in different components of the atom graph."""


class UniverseMismatch(FSModelError):
    """Two partitions are defined over different atom sets."""


class DepthMismatch(FSModelError):
    """A symbolic map leaves the truncated parameter domain."""


class NotEquivariant(FSModelError):
    """A partition is not compatible with a map."""


class ConfigError(FSModelError):
    """Invalid run configuration."""
