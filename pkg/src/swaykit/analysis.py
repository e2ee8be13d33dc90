"""Dataset-level analyses behind the command-line tool.

Each function takes a loaded :class:`~swaykit.core.Dataset` and returns a
:class:`~swaykit.report.ReportDocument` (plus the raw result objects where a
caller wants them).
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass

import numpy as np

from .calibration import (
    CalibrationModel,
    FAMILY_ORDER,
    apply_calibration,
    fit_family,
    fit_linear,
    select_best_family,
)
from .core import (
    CHANNEL_UNITS,
    CleanPolicy,
    DataError,
    Dataset,
    DegenerateError,
    SwayError,
    TrialRecord,
    clean_trial,
    trim_adjustment,
)
from .metrics import METRIC_NAMES, SwayMetricSet, trial_metrics
from .report import ReportDocument, Table
from .stats import bland_altman, icc_two_way_mixed, shapiro_wilk, spearman

HUMAN_SKIP_S = 5.0
AXIS_CHANNEL = {"AP": "cop_ap_mm", "ML": "cop_ml_mm", "RD": "cop_rd_mm"}
VALIDITY_METRICS = ("abs_mean", "rms", "path", "range", "velocity")
MASS_METRICS = ("abs_mean", "mean", "rms", "path", "range", "velocity")
SIGNIFICANCE_P = 0.001


@dataclass(frozen=True)
class TrialMetrics:
    trial: TrialRecord
    metrics: dict[str, SwayMetricSet]


def prepare_trial(t: TrialRecord, policy=CleanPolicy.DROP_MISSING, skip_s: float = HUMAN_SKIP_S) -> TrialRecord:
    """Clean, then drop the adjustment period for human trials only."""
    t = clean_trial(t, policy)
    if not t.is_robot and skip_s > 0:
        t = trim_adjustment(t, skip_s)
    return t


def compute_metrics(ds: Dataset, policy=CleanPolicy.DROP_MISSING,
                    skip_s: float = HUMAN_SKIP_S) -> list[TrialMetrics]:
    out = []
    for t in ds:
        try:
            prepared = prepare_trial(t, policy, skip_s)
            out.append(TrialMetrics(prepared, trial_metrics(prepared)))
        except SwayError as exc:
            if f"trial {t.id}" in str(exc):
                raise
            raise type(exc)(f"trial {t.id}: {exc}") from None
    return out


def _inputs(ds: Dataset) -> dict:
    return {"manifest_sha256": ds.digest, "n_trials": len(ds)}


def _warnings(tms: list[TrialMetrics]) -> list[str]:
    return [f"trial {tm.trial.id}: {w}" for tm in tms for w in tm.trial.warnings]


def _unit(channel: str) -> str:
    return CHANNEL_UNITS[channel]


# --------------------------------------------------------------------------
# metrics


METRIC_TABLE_COLUMNS = ["trial_id", "stance", "eyes", "load_kg", "round", "channel", "unit",
                        "n", "duration_s", *METRIC_NAMES]


def metrics_report(ds: Dataset, policy=CleanPolicy.DROP_MISSING,
                   tms: list[TrialMetrics] | None = None) -> ReportDocument:
    tms = compute_metrics(ds, policy) if tms is None else tms
    units = {"load_kg": "kg", "round": "count", "n": "samples", "duration_s": "s",
             "mean": "{unit}", "abs_mean": "{unit}", "rms": "{unit}", "path": "{unit}",
             "range": "{unit}", "velocity": "{unit}/s", "sd": "{unit}"}
    table = Table("table", list(METRIC_TABLE_COLUMNS), units)
    for tm in tms:
        t = tm.trial
        for ch, ms in tm.metrics.items():
            table.add(t.id, t.stance.value, t.eyes.value, t.load_kg, t.round, ch, _unit(ch),
                      ms.n, ms.duration_s, *(ms[m] for m in METRIC_NAMES))
    return ReportDocument(
        "metrics", _inputs(ds), [table], _warnings(tms),
        summary={"n_trials": len(tms), "n_rows": len(table.rows),
                 "sd_convention": "population (divide by n)",
                 "abs_mean_definition": "mean of absolute sample values; mean column holds the signed mean"},
    )


# --------------------------------------------------------------------------
# reliability


def _row_keys(tms: list[TrialMetrics], grouping: str):
    """Yield (stance, round, row_key, trial_metrics)."""
    counters = defaultdict(int)
    for tm in tms:
        t = tm.trial
        cell = (t.stance, t.eyes, t.load_kg, t.round)
        if grouping == "trial":
            key = (t.eyes.value, t.load_kg, counters[cell])
            counters[cell] += 1
        elif grouping == "load":
            key = (t.eyes.value, t.load_kg)
        else:
            raise DataError(f"unknown grouping {grouping!r}; use 'trial' or 'load'")
        yield t.stance, t.round, key, tm


def reliability_matrices(tms: list[TrialMetrics], metric: str, channel: str = "bm_raw",
                         grouping: str = "trial") -> dict:
    """Per stance, an n x k matrix (rows = matched trial cells, columns = rounds)."""
    if metric not in METRIC_NAMES:
        raise DataError(f"unknown metric {metric!r}")
    cells = defaultdict(lambda: defaultdict(lambda: defaultdict(list)))
    for stance, rnd, key, tm in _row_keys(tms, grouping):
        if channel not in tm.metrics:
            raise DataError(f"trial {tm.trial.id}: no channel {channel}")
        cells[stance][key][rnd].append(tm.metrics[channel][metric])
    out = {}
    for stance, rows in cells.items():
        rounds = sorted({r for per_round in rows.values() for r in per_round})
        if len(rounds) < 2:
            raise DataError(f"stance {stance.value}: reliability needs at least 2 rounds, found {len(rounds)}")
        matrix = []
        for key, per_round in rows.items():
            missing = [r for r in rounds if r not in per_round]
            if missing:
                raise DataError(
                    f"stance {stance.value}: unmatched rows across rounds, row {key} "
                    f"missing in round(s) {missing}"
                )
            matrix.append([float(np.mean(per_round[r])) for r in rounds])
        out[stance] = np.array(matrix)
    return out


def reliability_report(ds: Dataset, metrics=METRIC_NAMES, channel: str = "bm_raw",
                       grouping: str = "trial", alpha: float = 0.05,
                       policy=CleanPolicy.DROP_MISSING, tms=None) -> ReportDocument:
    tms = compute_metrics(ds, policy) if tms is None else tms
    unit = _unit(channel)
    cols = ["stance", "metric", "channel", "n_rows", "k_cols",
            "icc_single", "ci_single_lo", "ci_single_hi",
            "icc_average", "ci_average_lo", "ci_average_hi",
            "f_value", "p_value", "msr", "mse", "interpretation", "significant", "degenerate"]
    icc_units = {c: "ratio" for c in cols[5:11]}
    icc_units.update({"n_rows": "count", "k_cols": "count", "f_value": "ratio", "p_value": "probability",
                      "msr": f"{unit}^2", "mse": f"{unit}^2", "significant": "flag", "degenerate": "flag"})
    table = Table("icc", cols, icc_units)
    warnings = _warnings(tms)
    results = {}
    for metric in metrics:
        for stance, matrix in reliability_matrices(tms, metric, channel, grouping).items():
            r = icc_two_way_mixed(matrix, alpha)
            results[(stance.value, metric)] = r
            significant = r.p_value < alpha
            if not significant:
                warnings.append(f"{stance.value}/{metric}: ICC not significant (p = {r.p_value:.3g})")
            if r.degenerate:
                warnings.append(f"{stance.value}/{metric}: zero residual variance, ICC set to 1")
            table.add(stance.value, metric, channel, r.n_rows, r.k_cols,
                      r.icc_single, *r.ci95_single, r.icc_average, *r.ci95_average,
                      r.f_value, r.p_value, r.msr, r.mse, r.interpretation.value, significant, r.degenerate)
    doc = ReportDocument(
        "reliability", _inputs(ds), [table], warnings,
        summary={"model": "two-way mixed, consistency", "alpha": alpha, "grouping": grouping},
        results=results,
    )
    return doc


# --------------------------------------------------------------------------
# validity


def _groups(tms: list[TrialMetrics], split: str) -> dict[str, list[TrialMetrics]]:
    groups: dict[str, list[TrialMetrics]] = {}
    for tm in tms:
        t = tm.trial
        if split == "eyes":
            key = f"eyes-{t.eyes.value}"
        elif split == "condition":
            key = f"{t.stance.value}/eyes-{t.eyes.value}"
        elif split == "all":
            key = "all"
        else:
            raise DataError(f"unknown split {split!r}; use eyes, condition or all")
        groups.setdefault(key, []).append(tm)
    return groups


def _fp_trials(tms: list[TrialMetrics]) -> list[TrialMetrics]:
    with_fp = [tm for tm in tms if tm.trial.has_cop]
    if not with_fp:
        raise DataError("missing FP channels: no trial carries cop_ap_mm/cop_ml_mm")
    return with_fp


def stars(p: float) -> str:
    return "**" if p < SIGNIFICANCE_P else ""


def validity_report(ds: Dataset, split: str = "eyes", policy=CleanPolicy.DROP_MISSING,
                    tms=None) -> ReportDocument:
    tms = _fp_trials(compute_metrics(ds, policy) if tms is None else tms)
    groups = _groups(tms, split)
    long = Table("spearman", ["group", "fp_channel", "bm_metric", "n", "rho", "p_value", "strength", "stars"],
                 {"n": "count", "rho": "ratio", "p_value": "probability"})
    wide = Table("spearman_matrix", ["group", "fp_parameter", *(f"bm_{m}" for m in VALIDITY_METRICS)], {})
    normal = Table("shapiro_wilk", ["group", "channel", "metric", "n", "w", "p_value", "normal_at_0.05"],
                   {"n": "count", "w": "ratio", "p_value": "probability", "normal_at_0.05": "flag"})
    warnings = _warnings(tms)
    results = {}
    for gname, members in groups.items():
        for axis, fp_ch in AXIS_CHANNEL.items():
            cells = []
            for metric in VALIDITY_METRICS:
                bm = [tm.metrics["bm_raw"][metric] for tm in members]
                fp = [tm.metrics[fp_ch][metric] for tm in members]
                try:
                    r = spearman(bm, fp)
                except SwayError as exc:
                    warnings.append(f"{gname}/{axis}/{metric}: {exc}")
                    cells.append("")
                    continue
                results[(gname, axis, metric)] = r
                long.add(gname, axis, metric, r.n, r.rho, r.p_value, r.strength.value, stars(r.p_value))
                cells.append(f"{r.rho:.3f}{stars(r.p_value)}")
            wide.add(gname, f"CoP_{axis}", *cells)
        for ch in ("bm_raw", *AXIS_CHANNEL.values()):
            for metric in VALIDITY_METRICS:
                vals = [tm.metrics[ch][metric] for tm in members]
                try:
                    w, p = shapiro_wilk(vals)
                except SwayError as exc:
                    warnings.append(f"{gname}/{ch}/{metric} normality: {exc}")
                    continue
                normal.add(gname, ch, metric, len(vals), w, p, p > 0.05)
    doc = ReportDocument("validity", _inputs(ds), [long, wide, normal], warnings,
                         summary={"split": split, "stars": f"p < {SIGNIFICANCE_P}", "method": "spearman"},
                         results=results)
    return doc


# --------------------------------------------------------------------------
# agreement and calibration


def paired_metric(tms: list[TrialMetrics], metric: str, axis: str) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Return (trial ids, force-plate values, mat values)."""
    if axis not in AXIS_CHANNEL:
        raise DataError(f"unknown axis {axis!r}; use AP, ML or RD")
    if metric not in METRIC_NAMES:
        raise DataError(f"unknown metric {metric!r}")
    tms = _fp_trials(tms)
    ch = AXIS_CHANNEL[axis]
    ids = [tm.trial.id for tm in tms]
    fp = np.array([tm.metrics[ch][metric] for tm in tms])
    bm = np.array([tm.metrics["bm_raw"][metric] for tm in tms])
    return ids, fp, bm


def agreement_report(ds: Dataset, metric: str = "path", axis: str = "AP",
                     model: CalibrationModel | None = None,
                     policy=CleanPolicy.DROP_MISSING, tms=None) -> ReportDocument:
    tms = compute_metrics(ds, policy) if tms is None else tms
    ids, fp, bm = paired_metric(tms, metric, axis)
    warnings = _warnings(tms)
    if model is not None:
        if model.metric != metric or model.axis != axis:
            warnings.append(f"calibration model is for {model.axis}/{model.metric}, applied to {axis}/{metric}")
        bm = apply_calibration(model, bm)
    res = bland_altman(fp, bm)
    fp_unit = "mm/s" if metric == "velocity" else "mm"
    bm_unit = fp_unit if model is not None else ("unitless/s" if metric == "velocity" else "unitless")
    diff_unit = fp_unit if model is not None else "mixed"
    summary_t = Table("result", ["metric", "axis", "calibrated", "n_pairs", "bias", "sd_diff", "loa_lower",
                                 "loa_upper", "prop_bias_slope", "prop_bias_intercept", "prop_bias_p", "n_outliers"],
                      {"n_pairs": "count", "bias": diff_unit, "sd_diff": diff_unit, "loa_lower": diff_unit,
                       "loa_upper": diff_unit, "prop_bias_slope": "ratio", "prop_bias_intercept": diff_unit,
                       "prop_bias_p": "probability", "n_outliers": "count", "calibrated": "flag"})
    summary_t.add(metric, axis, model is not None, res.n_pairs, res.bias, res.sd_diff, res.loa_lower,
                  res.loa_upper, res.prop_bias_slope, res.prop_bias_intercept, res.prop_bias_p,
                  len(res.outlier_indices))
    points = Table("plot_points", ["index", "trial_id", "fp", "bm", "pair_mean", "difference", "outlier"],
                   {"index": "count", "fp": fp_unit, "bm": bm_unit, "pair_mean": diff_unit,
                    "difference": diff_unit, "outlier": "flag"})
    outliers = set(res.outlier_indices)
    for i, (tid, a, b) in enumerate(zip(ids, fp, bm)):
        points.add(i, tid, a, b, (a + b) / 2.0, a - b, i in outliers)
    lines = Table("plot_lines", ["line", "value"], {"value": diff_unit})
    lines.add("bias", res.bias)
    lines.add("loa_lower", res.loa_lower)
    lines.add("loa_upper", res.loa_upper)
    if res.prop_bias_p < 0.05:
        warnings.append(f"proportional bias detected (slope {res.prop_bias_slope:.4g}, p = {res.prop_bias_p:.3g})")
    doc = ReportDocument("agreement", _inputs(ds), [summary_t, points, lines], warnings,
                         summary={"difference": "FP - BM", "z": 1.96,
                                  "model": None if model is None else asdict(model)},
                         results={"agreement": res})
    return doc


def calibrate(ds: Dataset, metric: str = "path", axis: str = "AP",
              policy=CleanPolicy.DROP_MISSING, tms=None) -> tuple[CalibrationModel, ReportDocument]:
    tms = compute_metrics(ds, policy) if tms is None else tms
    _, fp, bm = paired_metric(tms, metric, axis)
    model = fit_linear(fp, bm, metric=metric, axis=axis)
    if model.degenerate:
        raise DegenerateError(f"degenerate calibration fit for {axis}/{metric}: constant mat values")
    t = Table("model", ["metric", "axis", "slope", "intercept", "r2", "n", "equation"],
              {"slope": "unitless per mm", "intercept": "unitless", "r2": "ratio", "n": "count"})
    t.add(model.metric, model.axis, model.slope, model.intercept, model.r2, model.n, model.equation())
    doc = ReportDocument("calibration", _inputs(ds), [t], _warnings(tms),
                         summary={"direction": model.direction, "equation": model.equation()})
    return model, doc


# --------------------------------------------------------------------------
# load versus sway models


def fit_mass_report(ds: Dataset, metrics=MASS_METRICS, channel: str = "bm_raw",
                    policy=CleanPolicy.DROP_MISSING, tms=None) -> ReportDocument:
    tms = compute_metrics(ds, policy) if tms is None else tms
    robot = [tm for tm in tms if tm.trial.load_kg is not None]
    if not robot:
        raise DataError("missing loads: no trial carries load_kg")
    cells = defaultdict(list)
    for tm in robot:
        cells[(tm.trial.stance.value, tm.trial.round)].append(tm)
    unit = _unit(channel)
    long = Table("fits", ["stance", "round", "metric", "family", "r2", "n",
                          "coef_0", "coef_1", "coef_2", "coef_3",
                          "r2_linear", "r2_quadratic", "r2_cubic", "r2_exponential"],
                 {"round": "count", "r2": "ratio", "n": "count", "coef_0": f"{unit} per kg^p",
                  "coef_1": f"{unit} per kg^p", "coef_2": f"{unit} per kg^p", "coef_3": f"{unit} per kg^p",
                  "r2_linear": "ratio", "r2_quadratic": "ratio", "r2_cubic": "ratio", "r2_exponential": "ratio"})
    warnings = _warnings(tms)
    results = {}
    keys = sorted(cells)
    for (stance, rnd) in keys:
        members = cells[(stance, rnd)]
        x = np.array([tm.trial.load_kg for tm in members])
        for metric in metrics:
            y = np.array([tm.metrics[channel][metric] for tm in members])
            best = select_best_family(x, y)
            results[(stance, rnd, metric)] = best
            per_family = {}
            for fam in FAMILY_ORDER:
                try:
                    per_family[fam.value] = fit_family(x, y, fam).r2
                except SwayError:
                    per_family[fam.value] = None
            coefs = list(best.coeffs) + [None] * (4 - len(best.coeffs))
            long.add(stance, rnd, metric, best.family.value, best.r2, best.n, *coefs,
                     per_family["linear"], per_family["quadratic"], per_family["cubic"],
                     per_family["exponential"])
    wide_cols = ["metric"] + [f"{s}_round{r}" for s, r in keys]
    wide = Table("r2_matrix", wide_cols, {c: "ratio" for c in wide_cols[1:]})
    for metric in metrics:
        wide.add(metric, *(results[(s, r, metric)].r2 for s, r in keys))
    doc = ReportDocument("mass-model", _inputs(ds), [long, wide], warnings,
                         summary={"selection": "max r2, near-ties to fewer parameters", "channel": channel,
                                  "coefficient_order": "highest power first; exponential is (a, b) in a*exp(b*x)"},
                         results=results)
    return doc
