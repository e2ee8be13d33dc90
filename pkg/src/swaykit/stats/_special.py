"""Regularized incomplete beta and the F / Student-t tails built on it.

Only what the ICC, Spearman and Bland-Altman tests need: upper-tail
probabilities and upper-tail quantiles.
"""
from __future__ import annotations

import math

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a > 0 and b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def _beta_density(a: float, b: float, x: float) -> float:
    return math.exp((a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - _log_beta(a, b))


def betaincinv(a: float, b: float, y: float) -> float:
    """Solve ``I_x(a, b) = y`` for x by Newton steps kept inside a bisection bracket."""
    if not 0.0 <= y <= 1.0:
        raise ValueError("y must lie in [0, 1]")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    x = a / (a + b)
    for _ in range(2000):
        f = betainc(a, b, x) - y
        if f == 0.0:
            return x
        if f < 0:
            lo = x
        else:
            hi = x
        dens = _beta_density(a, b, x)
        step = f / dens if dens > 0 and math.isfinite(dens) else math.inf
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4 * _EPS * max(x_new, 1e-290) or hi - lo <= 4 * _EPS * max(hi, 1e-290):
            return x_new
        x = x_new
    return x


def f_sf(f: float, dfn: float, dfd: float) -> float:
    """``P(F > f)`` for an F(dfn, dfd) variate."""
    if math.isnan(f):
        return math.nan
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc(dfd / 2.0, dfn / 2.0, dfd / (dfd + dfn * f))


def f_isf(p: float, dfn: float, dfd: float) -> float:
    """Upper-tail quantile: the f with ``P(F > f) = p``."""
    if not 0.0 < p < 1.0:
        if p == 0.0:
            return math.inf
        if p == 1.0:
            return 0.0
        raise ValueError("p must lie in [0, 1]")
    z = betaincinv(dfd / 2.0, dfn / 2.0, p)
    return dfd * (1.0 - z) / (dfn * z)


def f_ppf(q: float, dfn: float, dfd: float) -> float:
    return f_isf(1.0 - q, dfn, dfd)


def t_sf2(t: float, df: float) -> float:
    """Two-sided tail ``P(|T| > |t|)`` for Student t with ``df`` degrees of freedom."""
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))
