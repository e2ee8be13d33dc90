"""Verbal interpretation bands for correlation and ICC values."""
from __future__ import annotations

import enum
import math

from ..core import DataError


class Strength(str, enum.Enum):
    NEGLIGIBLE = "negligible"
    WEAK = "weak"
    MODERATE = "moderate"
    STRONG = "strong"
    VERY_STRONG = "very-strong"


class Reliability(str, enum.Enum):
    POOR = "poor"
    MODERATE = "moderate"
    GOOD = "good"
    EXCELLENT = "excellent"


# lower edges; a value sitting exactly on an edge belongs to the upper band
_CORRELATION_EDGES = (
    (0.90, Strength.VERY_STRONG),
    (0.70, Strength.STRONG),
    (0.40, Strength.MODERATE),
    (0.10, Strength.WEAK),
)


def classify_correlation(rho: float) -> Strength:
    r = abs(rho)
    if math.isnan(r) or r > 1.0 + 1e-12:
        raise DataError(f"correlation must satisfy |rho| <= 1, got {rho}")
    for edge, label in _CORRELATION_EDGES:
        if r >= edge:
            return label
    return Strength.NEGLIGIBLE


def classify_icc(icc: float) -> Reliability:
    """>0.9 excellent, 0.75-0.9 good, 0.5-0.75 moderate, below 0.5 poor."""
    if icc > 0.9:
        return Reliability.EXCELLENT
    if icc >= 0.75:
        return Reliability.GOOD
    if icc >= 0.5:
        return Reliability.MODERATE
    return Reliability.POOR
