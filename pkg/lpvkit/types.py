"""
Type definitions for lpvkit.

This module contains the enums used throughout the library.
"""

from enum import Enum

from .errors import LpvKitError


class TimeDomain(Enum):
    """Time domain of a scheduling map, matrix function or model."""
    DT = "dt"
    CT = "ct"

    @classmethod
    def parse(cls, value: "TimeDomain | str") -> "TimeDomain":
        """Accept an enum member or its case-insensitive text tag ('dt' / 'ct')."""
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise LpvKitError(f"Unknown time domain '{value}', expected 'dt' or 'ct'") from None

    def __str__(self) -> str:
        """Return user-friendly string representation."""
        return self.name


class Structure(Enum):
    """LPV-IO model structure, derived from which polynomials are non-trivial."""
    ARX = "arx"
    ARMAX = "armax"
    OE = "oe"
    BJ = "bj"
    GENERAL = "general"

    def __str__(self) -> str:
        """Return user-friendly string representation."""
        return self.name


class InterconnectKind(Enum):
    """Interconnection of two LFR models."""
    SERIES = "series"
    PARALLEL = "parallel"
    FEEDBACK = "feedback"
    HCONCAT = "hconcat"
    VCONCAT = "vconcat"

    def __str__(self) -> str:
        return self.value
