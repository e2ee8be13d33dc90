"""Two-way mixed-effects intraclass correlation, consistency definition.

Single-measure ICC(3,1) and average-measure ICC(3,k) with F-based confidence
intervals (McGraw & Wong, 1996).  Rows are measured units, columns are
sessions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import DataError, DegenerateError
from ._special import f_isf, f_sf
from .scales import Reliability, classify_icc

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class IccResult:
    icc_single: float
    icc_average: float
    ci95_single: tuple[float, float]
    ci95_average: tuple[float, float]
    f_value: float
    p_value: float
    n_rows: int
    k_cols: int
    msr: float
    mse: float
    interpretation: Reliability
    alpha: float = 0.05
    degenerate: bool = False


def anova_mean_squares(data: np.ndarray) -> tuple[float, float, float]:
    """Return (MSR, MSC, MSE) of a two-way ANOVA without interaction."""
    n, k = data.shape
    row_dev = data - data.mean(axis=1, keepdims=True)
    col_eff = row_dev.mean(axis=0, keepdims=True)
    resid = row_dev - col_eff
    row_means = data.mean(axis=1)
    ssr = k * float(np.sum((row_means - row_means.mean()) ** 2))
    ssc = n * float(np.sum(col_eff**2))
    sse = float(np.sum(resid**2))
    return ssr / (n - 1), ssc / (k - 1), sse / ((n - 1) * (k - 1))


def _avg_from_f(f: float) -> float:
    return 1 - 1 / f if f > 0 else -math.inf


def icc_two_way_mixed(data, alpha: float = 0.05) -> IccResult:
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise DataError("ICC input must be an n x k matrix")
    n, k = x.shape
    if n < 2 or k < 2:
        raise DataError(f"ICC needs at least 2 rows and 2 columns, got {n} x {k}")
    if not np.all(np.isfinite(x)):
        raise DataError("ICC input has missing or non-finite cells")
    if not 0.0 < alpha < 1.0:
        raise DataError(f"alpha must lie in (0, 1), got {alpha}")

    msr, _, mse = anova_mean_squares(x)
    df1 = n - 1
    df2 = (n - 1) * (k - 1)

    # residual sum of squares indistinguishable from rounding noise
    scale = float(np.max(np.abs(x)))
    if mse * df2 <= n * k * (16 * _EPS * scale) ** 2:
        if msr <= n * (16 * _EPS * scale) ** 2:
            raise DegenerateError("ICC undefined: the matrix has no variance")
        return IccResult(
            icc_single=1.0, icc_average=1.0,
            ci95_single=(1.0, 1.0), ci95_average=(1.0, 1.0),
            f_value=math.inf, p_value=0.0, n_rows=n, k_cols=k,
            msr=msr, mse=0.0, interpretation=classify_icc(1.0),
            alpha=alpha, degenerate=True,
        )

    icc1 = (msr - mse) / (msr + (k - 1) * mse)
    icck = (msr - mse) / msr if msr > 0 else -math.inf
    f = msr / mse
    f_lower = f / f_isf(alpha / 2, df1, df2)
    f_upper = f * f_isf(alpha / 2, df2, df1)
    ci1 = ((f_lower - 1) / (f_lower + k - 1), (f_upper - 1) / (f_upper + k - 1))
    cik = (_avg_from_f(f_lower), _avg_from_f(f_upper))
    return IccResult(
        icc_single=icc1, icc_average=icck,
        ci95_single=ci1, ci95_average=cik,
        f_value=f, p_value=f_sf(f, df1, df2), n_rows=n, k_cols=k,
        msr=msr, mse=mse, interpretation=classify_icc(icc1), alpha=alpha,
    )
