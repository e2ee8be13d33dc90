"""Bland-Altman agreement between a reference device and a candidate device."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import DataError
from ._special import t_sf2

Z_95 = 1.96


@dataclass(frozen=True)
class AgreementResult:
    bias: float
    sd_diff: float
    loa_lower: float
    loa_upper: float
    prop_bias_slope: float
    prop_bias_intercept: float
    prop_bias_p: float
    outlier_indices: tuple[int, ...]
    n_pairs: int


def limits_of_agreement(bias: float, sd_diff: float, z: float = Z_95) -> tuple[float, float]:
    return bias - z * sd_diff, bias + z * sd_diff


def _slope_test(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """OLS of y on x; returns (slope, intercept, two-sided p for slope = 0)."""
    n = x.size
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        return 0.0, float(y.mean()), 1.0
    slope = float(np.dot(dx, y - y.mean())) / sxx
    intercept = float(y.mean()) - slope * float(x.mean())
    resid = y - (intercept + slope * x)
    sse = float(np.dot(resid, resid))
    # residuals at rounding level: the fit is exact
    noise_floor = n * (64 * np.finfo(float).eps * max(float(np.max(np.abs(y))), 1e-300)) ** 2
    if sse <= noise_floor:
        exact_zero = abs(slope) * math.sqrt(sxx) <= math.sqrt(noise_floor)
        return (0.0 if exact_zero else slope), intercept, (1.0 if exact_zero else 0.0)
    se = math.sqrt(sse / (n - 2) / sxx)
    return slope, intercept, t_sf2(slope / se, n - 2)


def bland_altman(reference, candidate, z: float = Z_95) -> AgreementResult:
    """Differences are ``reference - candidate``; a negative bias means the
    candidate reads high."""
    a = np.asarray(reference, dtype=float).reshape(-1)
    b = np.asarray(candidate, dtype=float).reshape(-1)
    if a.size != b.size:
        raise DataError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 3:
        raise DataError(f"Bland-Altman analysis needs at least 3 pairs, got {a.size}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DataError("Bland-Altman input contains non-finite values")
    d = a - b
    means = (a + b) / 2.0
    bias = float(d.mean())
    sd = float(np.std(d, ddof=1))
    lo, hi = limits_of_agreement(bias, sd, z)
    slope, intercept, p = _slope_test(means, d)
    outliers = tuple(int(i) for i in np.flatnonzero((d < lo) | (d > hi)))
    return AgreementResult(bias, sd, lo, hi, slope, intercept, p, outliers, int(a.size))
