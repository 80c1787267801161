"""Exception types raised by the height-estimation pipeline."""
from __future__ import annotations


class ShadowHeightError(ValueError):
    """Base class for all library errors."""


class DomainError(ShadowHeightError):
    """An input lies outside the supported domain of an operation."""


class InfeasibleGeometryError(ShadowHeightError):
    """Measured angles or lengths admit no consistent sun/shadow geometry."""


class InfeasibleMeasurementError(InfeasibleGeometryError):
    """The cosine-rule discriminant of a shadow measurement is negative."""

    def __init__(self, message: str, discriminant: float):
        super().__init__(message)
        self.discriminant = discriminant


class SchemaError(ShadowHeightError):
    """A scene file does not conform to the schema.

    ``path`` is the dotted field path, ``line`` the 1-based source line (or None).
    """

    def __init__(self, message: str, path: str = "", line: int | None = None):
        where = path or "<document>"
        if line is not None:
            where = f"{where} (line {line})"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line
