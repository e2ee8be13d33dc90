"""Shapiro-Wilk W test using Royston's (1995) approximations, valid for 3 <= n <= 5000."""
from __future__ import annotations

import math
from functools import lru_cache
from statistics import NormalDist

import numpy as np

from ..core import DataError, DegenerateError

_STD_NORMAL = NormalDist()

# polynomial coefficients, lowest order first
_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coef, x: float) -> float:
    out = 0.0
    for c in reversed(coef):
        out = out * x + c
    return out


@lru_cache(maxsize=256)
def _coefficients(n: int) -> np.ndarray:
    """Weights for the lower half of the order statistics (positive values)."""
    nn2 = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    m = np.array([_STD_NORMAL.inv_cdf((i - 0.375) / (n + 0.25)) for i in range(1, nn2 + 1)])
    summ2 = 2.0 * float(np.sum(m * m))
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a2 = _poly(_C2, rsn) - m[1] / ssumm2
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a1**2 - 2.0 * a2**2))
        a = -m / fac
        a[1] = a2
    else:
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1**2))
        a = -m / fac
    a[0] = a1
    return a


def shapiro_wilk(x) -> tuple[float, float]:
    """Return ``(W, p)`` for the hypothesis that ``x`` is normally distributed."""
    v = np.sort(np.asarray(x, dtype=float).reshape(-1))
    n = v.size
    if n < 3 or n > 5000:
        raise DataError(f"Shapiro-Wilk needs 3 <= n <= 5000, got n={n}")
    if not np.all(np.isfinite(v)):
        raise DataError("Shapiro-Wilk input contains non-finite values")
    if v[-1] == v[0]:
        raise DegenerateError("Shapiro-Wilk undefined for zero-variance data")

    a = _coefficients(n)
    nn2 = n // 2
    numerator = float(np.dot(a, v[::-1][:nn2] - v[:nn2])) ** 2
    ssq = float(np.sum((v - v.mean()) ** 2))
    w = min(numerator / ssq, 1.0)

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return w, min(max(p, 0.0), 1.0)

    w1 = 1.0 - w
    if w1 <= 0.0:
        return w, 1.0
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return w, 1e-99
        y = -math.log(gamma - y)
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        ln_n = math.log(n)
        mu = _poly(_C5, ln_n)
        sigma = math.exp(_poly(_C6, ln_n))
    p = _STD_NORMAL.cdf((mu - y) / sigma)
    return w, p
