"""``swaykit`` command-line entry point.

Exit codes: 0 success, 1 input/validation error, 2 numerical or degenerate
analysis error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from dataclasses import replace
from pathlib import Path

from . import analysis
from .calibration import CALIBRATION_METRICS, load_model, save_model
from .core import CleanPolicy, DataError, DegenerateError, load_dataset, save_dataset
from .metrics import METRIC_NAMES
from .sim import SimConfig, load_config, simulate

log = logging.getLogger("swaykit")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def _global_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--manifest", type=Path, help="dataset manifest (JSON)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the simulation seed")
    p.add_argument("--deterministic", action="store_true", help="omit timestamps so reruns are byte-identical")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    p.add_argument("--missing", choices=[p.value for p in CleanPolicy], default=CleanPolicy.DROP_MISSING.value,
                   help="how to treat non-finite samples")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(prog="swaykit", description="Postural sway metrics and device validation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic dataset")
    p.add_argument("--config", type=Path, help="simulation config (JSON)")
    p.add_argument("--protocol", choices=["robot", "human"], help="override the config protocol")
    p.add_argument("--participants", type=int, help="human cohort size")
    p.add_argument("--rounds", type=int, help="override the number of rounds")

    sub.add_parser("metrics", parents=[common], help="per-trial, per-channel sway metrics")

    p = sub.add_parser("reliability", parents=[common], help="test-retest ICC per stance and metric")
    p.add_argument("--metric", choices=METRIC_NAMES, action="append", help="repeatable; default all")
    p.add_argument("--grouping", choices=["trial", "load"], default="trial")
    p.add_argument("--channel", default="bm_raw")

    p = sub.add_parser("validity", parents=[common], help="Spearman correlations between mat and force plate")
    p.add_argument("--split", choices=["eyes", "condition", "all"], default="eyes")

    p = sub.add_parser("agreement", parents=[common], help="Bland-Altman agreement and plot data")
    p.add_argument("--metric", choices=METRIC_NAMES, default="path")
    p.add_argument("--axis", choices=["AP", "ML", "RD"], default="AP")
    p.add_argument("--model", type=Path, help="calibration model to apply to mat values first")

    p = sub.add_parser("calibrate", parents=[common], help="fit raw = slope*cop + intercept")
    p.add_argument("--metric", choices=CALIBRATION_METRICS, default="path")
    p.add_argument("--axis", choices=["AP", "ML", "RD"], default="AP")
    p.add_argument("--model-out", type=Path, help="where to write the model (default OUT/calibration_model.json)")

    p = sub.add_parser("fit-mass", parents=[common], help="load-versus-sway model selection")
    p.add_argument("--metric", choices=METRIC_NAMES, action="append", help="repeatable; default all but sd")

    sub.add_parser("report", parents=[common], help="run every analysis the dataset supports")
    return parser


def _need_manifest(args):
    if args.manifest is None:
        raise DataError("--manifest is required for this command")
    return load_dataset(args.manifest)


def cmd_simulate(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if args.protocol and args.protocol != cfg.protocol:
            raise DataError(f"--protocol {args.protocol} conflicts with config protocol {cfg.protocol}")
    else:
        cfg = SimConfig(protocol=args.protocol or "robot")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.participants is not None:
        overrides["n_participants"] = args.participants
    if args.rounds is not None:
        overrides["rounds"] = args.rounds
    if overrides:
        cfg = replace(cfg, **overrides)
    ds = simulate(cfg)
    manifest = save_dataset(ds, args.out)
    counts = Counter((t.stance.value, t.eyes.value, t.round) for t in ds)
    loads = sorted({t.load_kg for t in ds if t.load_kg is not None})
    print(f"{cfg.protocol} campaign: {len(ds)} trials written, manifest {manifest}")
    if loads:
        print(f"  loads (kg): {', '.join(f'{kg:g}' for kg in loads)}; {cfg.trials_per_cell} trials per load")
    for (stance, eyes, rnd), n in sorted(counts.items()):
        print(f"  {stance:14s} eyes={eyes:6s} round {rnd}: {n} trials")
    return EXIT_OK


def _emit(doc, args) -> None:
    path = doc.write(args.out, deterministic=args.deterministic)
    for w in doc.warnings:
        log.warning(w)
    print(f"wrote {path}")


def cmd_metrics(args) -> int:
    ds = _need_manifest(args)
    _emit(analysis.metrics_report(ds, args.missing), args)
    return EXIT_OK


def cmd_reliability(args) -> int:
    ds = _need_manifest(args)
    doc = analysis.reliability_report(ds, tuple(args.metric or METRIC_NAMES), args.channel,
                                      args.grouping, args.alpha, args.missing)
    _emit(doc, args)
    for (stance, metric), r in doc.results.items():
        print(f"{stance:13s} {metric:9s} ICC(3,1)={r.icc_single:.3f} "
              f"({r.ci95_single[0]:.3f}, {r.ci95_single[1]:.3f}) ICC(3,k)={r.icc_average:.3f} "
              f"{r.interpretation.value}")
    return EXIT_OK


def cmd_validity(args) -> int:
    ds = _need_manifest(args)
    _emit(analysis.validity_report(ds, args.split, args.missing), args)
    return EXIT_OK


def cmd_agreement(args) -> int:
    ds = _need_manifest(args)
    model = load_model(args.model) if args.model else None
    doc = analysis.agreement_report(ds, args.metric, args.axis, model, args.missing)
    _emit(doc, args)
    r = doc.results["agreement"]
    print(f"bias {r.bias:.6g}, 95% LoA ({r.loa_lower:.6g}, {r.loa_upper:.6g}), "
          f"{len(r.outlier_indices)} outliers, proportional-bias p = {r.prop_bias_p:.3g}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    ds = _need_manifest(args)
    model, doc = analysis.calibrate(ds, args.metric, args.axis, args.missing)
    _emit(doc, args)
    target = args.model_out or (args.out / "calibration_model.json")
    target.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, target)
    print(model.equation())
    print(f"model written to {target} (r2 = {model.r2:.4f}, n = {model.n})")
    return EXIT_OK


def cmd_fit_mass(args) -> int:
    ds = _need_manifest(args)
    metrics = tuple(args.metric or analysis.MASS_METRICS)
    doc = analysis.fit_mass_report(ds, metrics, policy=args.missing)
    _emit(doc, args)
    for (stance, rnd, metric), fit in doc.results.items():
        print(f"{stance:13s} round {rnd} {metric:9s} {fit.family.value:11s} R2={fit.r2:.3f}")
    return EXIT_OK


def cmd_report(args) -> int:
    ds = _need_manifest(args)
    tms = analysis.compute_metrics(ds, args.missing)
    docs = [analysis.metrics_report(ds, tms=tms)]
    if len({t.round for t in ds}) >= 2:
        docs.append(analysis.reliability_report(ds, alpha=args.alpha, tms=tms))
    if any(t.load_kg is not None for t in ds):
        docs.append(analysis.fit_mass_report(ds, tms=tms))
    human_fp = [tm for tm in tms if tm.trial.has_cop and not tm.trial.is_robot]
    if len(human_fp) >= 3:
        docs.append(analysis.validity_report(ds, tms=human_fp))
        docs.append(analysis.agreement_report(ds, "path", "AP", tms=human_fp))
    for doc in docs:
        _emit(doc, args)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "metrics": cmd_metrics,
    "reliability": cmd_reliability,
    "validity": cmd_validity,
    "agreement": cmd_agreement,
    "calibrate": cmd_calibrate,
    "fit-mass": cmd_fit_mass,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except DegenerateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
