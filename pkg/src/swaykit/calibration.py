"""Least-squares calibration of mat metrics to force-plate metrics, and the
load-versus-sway model family (linear, quadratic, cubic, exponential)."""
from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import Polynomial

from .core import DataError, DegenerateError

CALIBRATION_METRICS = ("path", "range", "velocity", "rms", "abs_mean")
AXES = ("AP", "ML", "RD")
DIRECTION = "raw = slope*cop + intercept"

# r2 values closer than this count as a tie
R2_TIE_TOL = 1e-9


class Family(str, enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    CUBIC = "cubic"
    EXPONENTIAL = "exponential"

    @property
    def n_params(self) -> int:
        return {"linear": 2, "quadratic": 3, "cubic": 4, "exponential": 2}[self.value]

    @property
    def degree(self) -> int | None:
        return {"linear": 1, "quadratic": 2, "cubic": 3}.get(self.value)


# candidate order used for tie-breaking: fewer parameters first
FAMILY_ORDER = (Family.LINEAR, Family.EXPONENTIAL, Family.QUADRATIC, Family.CUBIC)


@dataclass(frozen=True)
class CalibrationModel:
    metric: str
    axis: str
    slope: float
    intercept: float
    r2: float
    n: int
    degenerate: bool = False
    direction: str = DIRECTION

    def to_cop(self, raw):
        return apply_calibration(self, raw)

    def to_raw(self, cop):
        return self.slope * np.asarray(cop, dtype=float) + self.intercept

    def equation(self) -> str:
        """Human-readable form, e.g. ``Raw Data AP Sway Path = 1928*CoP_AP Sway Path - 624``."""
        label = _METRIC_LABELS.get(self.metric, self.metric)
        sign = "-" if self.intercept < 0 else "+"
        return (
            f"Raw Data {self.axis} {label} = {self.slope:.6g}*CoP_{self.axis} {label} "
            f"{sign} {abs(self.intercept):.6g}"
        )


_METRIC_LABELS = {
    "path": "Sway Path",
    "range": "Sway Range",
    "velocity": "Sway Velocity",
    "rms": "Sway RMS",
    "abs_mean": "|Mean|",
    "mean": "Mean",
    "sd": "SD",
}


def metric_label(metric: str) -> str:
    return _METRIC_LABELS.get(metric, metric)


@dataclass(frozen=True)
class RegressionFit:
    family: Family
    coeffs: tuple[float, ...]  # highest power first; (a, b) for a*exp(b*x)
    r2: float
    n: int
    degenerate: bool = False

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        if self.family is Family.EXPONENTIAL:
            a, b = self.coeffs
            return a * np.exp(b * x)
        return np.polyval(self.coeffs, x)


def _xy(x, y, min_n: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != y.size:
        raise DataError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < min_n:
        raise DataError(f"need at least {min_n} points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("regression input contains non-finite values")
    return x, y


def r_squared(y: np.ndarray, fitted: np.ndarray) -> tuple[float, bool]:
    """Return (r2, degenerate).  Constant y is degenerate and reports 0."""
    resid = y - fitted
    ss_res = float(np.dot(resid, resid))
    dy = y - y.mean()
    ss_tot = float(np.dot(dy, dy))
    if ss_tot == 0.0:
        return 0.0, True
    return max(0.0, 1.0 - ss_res / ss_tot), False


def fit_linear(x, y, metric: str = "path", axis: str = "AP") -> CalibrationModel:
    """OLS of ``y`` (mat raw metric) on ``x`` (force-plate metric)."""
    x, y = _xy(x, y, 3)
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise DegenerateError("cannot fit a calibration line to a constant predictor")
    slope = float(np.dot(dx, y - y.mean())) / sxx
    intercept = float(y.mean()) - slope * float(x.mean())
    r2, degenerate = r_squared(y, intercept + slope * x)
    if degenerate:
        slope, intercept = 0.0, float(y.mean())
    return CalibrationModel(metric, axis, slope, intercept, r2, int(x.size), degenerate)


def apply_calibration(m: CalibrationModel, raw_value):
    """Map a mat reading back to force-plate units by inverting the line."""
    if m.slope == 0.0 or not math.isfinite(m.slope):
        raise DegenerateError("calibration model with zero slope is not invertible")
    out = (np.asarray(raw_value, dtype=float) - m.intercept) / m.slope
    return float(out) if out.ndim == 0 else out


def save_model(m: CalibrationModel, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(asdict(m), indent=1) + "\n", encoding="utf-8")


def load_model(path: str | os.PathLike) -> CalibrationModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"calibration model not found: {path}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DataError(f"bad model file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise DataError(f"bad model file {path}: expected an object")
    for key in ("metric", "axis", "slope", "intercept"):
        if key not in doc:
            raise DataError(f"bad model file {path}: missing '{key}'")
    if doc["axis"] not in AXES:
        raise DataError(f"bad model file {path}: axis must be one of {AXES}")
    try:
        slope = float(doc["slope"])
        intercept = float(doc["intercept"])
    except (TypeError, ValueError):
        raise DataError(f"bad model file {path}: slope/intercept must be numbers") from None
    if not (math.isfinite(slope) and math.isfinite(intercept)) or slope == 0.0:
        raise DataError(f"bad model file {path}: slope must be finite and non-zero")
    return CalibrationModel(
        metric=str(doc["metric"]), axis=doc["axis"], slope=slope, intercept=intercept,
        r2=float(doc.get("r2", math.nan)), n=int(doc.get("n", 0)),
        degenerate=bool(doc.get("degenerate", False)),
    )


# --------------------------------------------------------------------------
# model family


def _fit_polynomial(x: np.ndarray, y: np.ndarray, degree: int) -> tuple[tuple[float, ...], np.ndarray]:
    # standardize x so the Vandermonde columns are comparably scaled
    mu = float(x.mean())
    s = float(x.std())
    if s == 0.0:
        raise DegenerateError("singular system: predictor is constant")
    z = (x - mu) / s
    vander = np.vander(z, degree + 1, increasing=True)
    coef_z, _, rank, _ = np.linalg.lstsq(vander, y, rcond=None)
    if rank < degree + 1:
        raise DegenerateError(
            f"singular system: {degree + 1} parameters but only {np.unique(x).size} distinct x values"
        )
    fitted = vander @ coef_z
    poly_x = Polynomial(coef_z)(Polynomial([-mu / s, 1.0 / s]))
    coef_x = np.zeros(degree + 1)
    coef_x[: poly_x.coef.size] = poly_x.coef
    return tuple(float(c) for c in coef_x[::-1]), fitted


def fit_family(x, y, family: Family | str) -> RegressionFit:
    family = Family(family)
    x, y = _xy(x, y, family.n_params + 1)
    if family is Family.EXPONENTIAL:
        if np.any(y <= 0):
            raise DataError("exponential fit needs strictly positive y")
        (b, ln_a), _ = _fit_polynomial(x, np.log(y), 1)
        coeffs = (math.exp(ln_a), b)
        fitted = coeffs[0] * np.exp(coeffs[1] * x)
    else:
        coeffs, fitted = _fit_polynomial(x, y, family.degree)
    r2, degenerate = r_squared(y, fitted)
    return RegressionFit(family, coeffs, r2, int(x.size), degenerate)


def select_best_family(x, y, families=FAMILY_ORDER) -> RegressionFit:
    """Highest-r2 family; near-ties go to the candidate with fewer parameters."""
    families = sorted((Family(f) for f in families), key=FAMILY_ORDER.index)
    if np.unique(np.asarray(x, dtype=float)).size < 2:
        raise DegenerateError("cannot fit load models: predictor takes a single value")
    best = None
    failures = []
    for fam in families:
        try:
            fit = fit_family(x, y, fam)
        except (DataError, DegenerateError) as exc:
            failures.append((fam, exc))
            continue
        if best is None or fit.r2 > best.r2 + R2_TIE_TOL:
            best = fit
    if best is None:
        detail = "; ".join(f"{fam.value}: {exc}" for fam, exc in failures)
        if all(isinstance(exc, DegenerateError) for _, exc in failures):
            raise DegenerateError("no model family applicable: " + detail)
        raise DataError("no model family applicable: " + detail)
    return best
