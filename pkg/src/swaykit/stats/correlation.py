from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import DataError, DegenerateError
from ._special import t_sf2
from .scales import Strength, classify_correlation


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int
    strength: Strength


def average_ranks(x) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    v = np.asarray(x, dtype=float)
    order = np.argsort(v, kind="mergesort")
    sorted_v = v[order]
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, sorted_v[1:] != sorted_v[:-1]])
    ends = np.r_[starts[1:], v.size]
    run_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(v.size)
    ranks[order] = np.repeat(run_rank, ends - starts)
    return ranks


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.dot(dx, dy) / math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy))))
    return max(-1.0, min(1.0, r))


def spearman(x, y) -> CorrelationResult:
    """Spearman's rho with a t-approximation p-value (n - 2 df, two-sided)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != y.size:
        raise DataError(f"length mismatch: {x.size} vs {y.size}")
    n = x.size
    if n < 3:
        raise DataError(f"Spearman correlation needs n >= 3, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("Spearman input contains non-finite values")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateError("Spearman correlation undefined for a constant input")
    rho = pearson(average_ranks(x), average_ranks(y))
    if abs(rho) >= 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = t_sf2(t, n - 2)
    return CorrelationResult(rho, p, n, classify_correlation(rho))
