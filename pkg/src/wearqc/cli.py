"""``wearqc`` command-line entry point.

Exit codes: 0 success, 1 user error (bad flags, missing or malformed
input), 2 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import config as config_mod
from .activity import ai_abs
from .bootstrap import bootstrap_spread, median_tod_impute, parse_method, records_to_csv
from .compliance import compliance_report, evaluate_alerts, report_to_json
from .errors import WearQCError
from .ingest import (
    assemble_recording,
    load_manifest,
    read_e4_archive,
    session_intervals,
    write_manifest,
)
from .nonwear import ALGORITHMS, benchmark_nonwear
from .pipeline import VALID_SOURCES, eda_pipeline, valid_intervals
from .signal import UniformSignal
from .webhook import post_webhook
from .windows import WindowRule, ccdf, extract_windows, window_ratios

__all__ = ["main", "run"]

WEBHOOK_ENV = "WEARQC_WEBHOOK_URL"
DEFAULT_GRID = tuple(round(0.05 * k, 2) for k in range(21)) + (0.85,)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# --------------------------------------------------------------------------
# helpers


def _need(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise WearQCError(f"input not found: {p}")
    return p


def _out(path) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _flag(v: bool) -> str:
    return "1" if v else "0"


def _write_csv(path, header: str, columns) -> None:
    """Write equally long columns; floats with shortest round-trip repr."""
    cols = [np.asarray(c) for c in columns]
    lines = [header]
    for row in zip(*(c.tolist() for c in cols)):
        lines.append(",".join(_cell(v) for v in row))
    _out(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cell(v) -> str:
    if isinstance(v, bool):
        return _flag(v)
    if isinstance(v, float):
        return "" if v != v else repr(v)
    return str(v)


def _recording(path, acc_scale):
    p = _need(path)
    if p.is_file() and p.suffix == ".json" or (p.is_dir() and (p / "manifest.json").exists()):
        return load_manifest(p)
    return assemble_recording([p], acc_scale=acc_scale, participant_id=p.stem)


def _load_config(args) -> config_mod.ToolConfig:
    cfg = config_mod.load(_need(args.config)) if args.config else config_mod.ToolConfig()
    if getattr(args, "jobs", None) is not None:
        if args.jobs < 1:
            raise WearQCError("--jobs must be >= 1")
        cfg = dataclasses.replace(cfg, study=dataclasses.replace(cfg.study, jobs=args.jobs))
    if getattr(args, "tz", None):
        cfg = dataclasses.replace(cfg, study=dataclasses.replace(cfg.study, tz=args.tz))
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, study=dataclasses.replace(cfg.study, seed=args.seed))
    return cfg


def _read_series_csv(path) -> UniformSignal:
    """``timestamp,value`` CSV with a header row and uniform spacing."""
    p = _need(path)
    try:
        data = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise WearQCError(f"{p}: cannot parse series CSV: {exc}") from None
    if data.shape[0] < 2 or data.shape[1] < 2:
        raise WearQCError(f"{p}: need at least two rows of timestamp,value")
    t, v = data[:, 0], data[:, 1]
    dt = np.diff(t)
    step = float(np.median(dt))
    if step <= 0 or np.max(np.abs(dt - step)) > 1e-6 * max(1.0, step):
        raise WearQCError(f"{p}: timestamps are not uniformly spaced")
    if np.isnan(v).any():
        raise WearQCError(f"{p}: series contains missing values; the reference must be gap-free")
    return UniformSignal(float(t[0]), 1.0 / step, v, "")


# --------------------------------------------------------------------------
# subcommands


def cmd_ingest(args, cfg, out):
    paths = [_need(p) for p in args.inputs]
    labels = _need(args.labels) if args.labels else None
    rec = assemble_recording(paths, labels, args.participant, acc_scale=cfg.io.acc_scale)
    path = write_manifest(rec, args.out)
    total = session_intervals(rec).total_duration() / 3600.0
    print(f"{rec.participant_id}: {len(rec.sessions)} session(s), {total:.3f} h -> {path}", file=out)


def cmd_nonwear(args, cfg, out):
    session = read_e4_archive(_need(args.input), cfg.io.acc_scale)
    algo_cfg = cfg.refined if args.algo == "refined" else cfg.bottcher
    res = ALGORITHMS[args.algo](session, algo_cfg)
    s = res.sub_sqis
    _write_csv(args.out, "timestamp,wrist_sqi,movement_sqi,temp_sqi,eda_sqi",
               [res.wrist_sqi.times(), res.wrist_sqi.values, s["movement"].values,
                s["temperature"].values, s["eda"].values])
    ipath = Path(args.intervals) if args.intervals else Path(args.out).with_suffix(".intervals.json")
    doc = {"algorithm": args.algo, "wear_intervals": res.wear_intervals.to_list(),
           "wear_hours": res.wear_intervals.total_duration() / 3600.0}
    _out(ipath).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(f"{args.algo}: wear fraction {res.wear_fraction:.4f}, "
          f"{len(res.wear_intervals)} bout(s) -> {args.out}", file=out)


def cmd_eda(args, cfg, out):
    session = read_e4_archive(_need(args.input), cfg.io.acc_scale)
    res = eda_pipeline(session, cfg.eda, cfg.refined, apply_nonwear=not args.no_nonwear)
    p = res.processed
    _write_csv(args.out, "timestamp,raw_us,processed_us,valid,noise_amp_us,range_sqi,noise_sqi",
               [res.raw.times(), res.raw.channel(0), p.signal.channel(0), p.valid.values,
                res.noise_amp, res.range_sqi.values, res.noise_sqi.values])
    if args.plot:
        from .plotting import plot_eda, save_svg

        save_svg(plot_eda(res.raw.times(), res.raw.channel(0), p.signal.channel(0), p.valid.values,
                          res.noise_amp, cfg.eda.noise_threshold_us, res.range_sqi.values,
                          res.noise_sqi.values), _out(args.plot))
    print(f"eda: retained {p.valid_fraction:.4f} of {len(p)} samples -> {args.out}", file=out)


def cmd_activity(args, cfg, out):
    session = read_e4_archive(_need(args.input), cfg.io.acc_scale)
    ai = ai_abs(session.acc, cfg.activity)
    _write_csv(args.out, "timestamp,ai_abs", [ai.times(), ai.channel(0)])
    print(f"activity: {len(ai)} value(s) -> {args.out}", file=out)


def cmd_windows(args, cfg, out):
    rule = WindowRule.parse(args.rule)
    ratios = []
    for path in args.inputs:
        rec = _recording(path, cfg.io.acc_scale)
        valid = valid_intervals(rec, args.valid, cfg.eda, cfg.refined, cfg.study.jobs)
        ratios.extend(window_ratios(extract_windows(rec, rule, cfg.study.tz), valid))
    lines = ["participant,label,start,end,ratio"]
    lines += [f"{r.window.participant_id},{r.window.label},{r.window.start!r},{r.window.end!r},{r.ratio!r}"
              for r in ratios]
    _out(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    grid = DEFAULT_GRID if args.grid is None else tuple(float(x) for x in args.grid.split(","))
    grid = tuple(sorted(set(grid)))
    curves = ccdf(ratios, grid)
    if args.ccdf:
        rows = ["participant,threshold,count"]
        rows += [f"{pid},{x!r},{c}" for pid, pts in curves.items() for x, c in pts]
        _out(args.ccdf).write_text("\n".join(rows) + "\n", encoding="utf-8")
    if args.plot:
        from .plotting import plot_ccdf, save_svg

        save_svg(plot_ccdf(curves), _out(args.plot))
    print(f"windows: {len(ratios)} window(s) -> {args.out}", file=out)


def cmd_bootstrap(args, cfg, out):
    bcfg = cfg.bootstrap_config()
    changes = {}
    if args.ratios:
        changes["retention_ratios"] = tuple(float(x) for x in args.ratios.split(","))
    if args.iters is not None:
        changes["iterations"] = args.iters
    if args.method:
        changes["method"] = parse_method(args.method)
    if args.metrics:
        changes["metrics"] = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    bcfg = dataclasses.replace(bcfg, **changes)
    imputer = None
    if args.impute == "tod":
        tz, bin_s = cfg.study.tz, cfg.io.impute_bin_s

        def imputer(masked):
            return median_tod_impute(masked, [masked], bin_s, tz)

    records = []
    for path in args.inputs:
        ref = _read_series_csv(path)
        records.extend(bootstrap_spread(ref, bcfg, Path(path).stem, cfg.study.jobs, imputer))
    records.sort(key=lambda r: (r.series_id, r.metric, r.retention_ratio, r.iteration))
    _out(args.out).write_text(records_to_csv(records), encoding="utf-8")
    if args.plot:
        from .plotting import plot_bootstrap, save_svg

        save_svg(plot_bootstrap(records), _out(args.plot))
    print(f"bootstrap: {len(records)} record(s) -> {args.out}", file=out)


def cmd_compliance(args, cfg, out, err):
    rec = _recording(args.input, cfg.io.acc_scale)
    ccfg = cfg.compliance_config()
    doc = compliance_report(rec, ccfg, now=args.now)
    _out(args.out).write_text(report_to_json(doc), encoding="utf-8")
    if args.svg:
        from .plotting import plot_compliance, save_svg

        save_svg(plot_compliance(doc), _out(args.svg))
    print(f"compliance: {len(doc['streams'].get('wearable', []))} day(s) -> {args.out}", file=out)
    url = args.webhook_url or os.environ.get(WEBHOOK_ENV)
    if url and args.now is not None:
        wear = session_intervals(rec, "session")
        for alert in evaluate_alerts(wear, args.now, ccfg.alert_rule, rec.participant_id):
            res = post_webhook(alert, url, timeout_s=args.webhook_timeout)
            if res.ok:
                print(f"webhook: delivered alert for {alert.participant_id} "
                      f"after {res.attempts} attempt(s)", file=out)
            else:
                # delivery problems are reported, never fatal
                print(f"webhook: delivery failed after {res.attempts} attempt(s): {res.error}", file=err)


def cmd_bench(args, cfg, out):
    seed = cfg.study.seed
    results = {a: benchmark_nonwear(args.hours, a, seed=seed, repetitions=args.reps)
               for a in ("refined", "bottcher")}
    print(f"non-wear benchmark: {args.hours:g} h synthetic E4 data, seed {seed}, "
          f"{args.reps} repetition(s)", file=out)
    print(f"{'algorithm':<10} {'ms/hour':>10}", file=out)
    for a, r in results.items():
        print(f"{a:<10} {r.median_ms_per_hour:>10.2f}", file=out)
    ratio = results["bottcher"].median_ms_per_hour / results["refined"].median_ms_per_hour
    print(f"speedup    {ratio:>10.2f}x", file=out)


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value config file (flags override it)")
    common.add_argument("--jobs", type=int, help="worker count; output does not depend on it")

    parser = _Parser(prog="wearqc", description="Wearable data quality toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", parents=[common], help="assemble E4 archives into a manifest")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="ARCHIVE")
    p.add_argument("--labels", help="name,start,end label CSV")
    p.add_argument("--participant", help="participant id (default: parent folder name)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("nonwear", parents=[common], help="wrist non-wear SQI")
    p.add_argument("--algo", choices=sorted(ALGORITHMS), default="refined")
    p.add_argument("--in", dest="input", required=True, metavar="ARCHIVE")
    p.add_argument("--out", required=True)
    p.add_argument("--intervals", help="wear intervals JSON (default: next to --out)")

    p = sub.add_parser("eda-process", parents=[common], help="EDA SQI and artifact processing")
    p.add_argument("--in", dest="input", required=True, metavar="ARCHIVE")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", help="SVG of raw/processed EDA and noise amplitude")
    p.add_argument("--no-nonwear", action="store_true", help="skip the non-wear filter")

    p = sub.add_parser("activity", parents=[common], help="per-second activity index")
    p.add_argument("--in", dest="input", required=True, metavar="ARCHIVE")
    p.add_argument("--out", required=True)

    p = sub.add_parser("windows", parents=[common], help="window data ratios and CCDF")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="MANIFEST")
    p.add_argument("--rule", required=True,
                   help="daily:HH:MM-HH:MM[@label] or event:ANCHOR:OFFSET_S:DURATION_S[:label]")
    p.add_argument("--valid", choices=VALID_SOURCES, default="wear+eda")
    p.add_argument("--tz")
    p.add_argument("--out", required=True)
    p.add_argument("--ccdf")
    p.add_argument("--grid", help="comma-separated thresholds in [0, 1]")
    p.add_argument("--plot")

    p = sub.add_parser("bootstrap", parents=[common], help="gap-induction bootstrap")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="CSV")
    p.add_argument("--ratios")
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--method")
    p.add_argument("--metrics")
    p.add_argument("--impute", choices=("none", "tod"), default="none")
    p.add_argument("--tz")
    p.add_argument("--out", required=True)
    p.add_argument("--plot")

    p = sub.add_parser("compliance", parents=[common], help="compliance report and alerts")
    p.add_argument("--in", dest="input", required=True, metavar="MANIFEST")
    p.add_argument("--tz")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.add_argument("--webhook-url", help=f"alert webhook (fallback: ${WEBHOOK_ENV})")
    p.add_argument("--webhook-timeout", type=float, default=10.0)
    p.add_argument("--now", type=float, help="evaluation time, Unix seconds")

    p = sub.add_parser("bench", help="benchmarks")
    bsub = p.add_subparsers(dest="bench", metavar="target", parser_class=_Parser)
    bsub.required = True
    b = bsub.add_parser("nonwear", parents=[common], help="refined vs reference non-wear timing")
    b.add_argument("--hours", type=float, default=24.0)
    b.add_argument("--seed", type=int)
    b.add_argument("--reps", type=int, default=10)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load_config(args)
        handlers = {
            "ingest": cmd_ingest, "nonwear": cmd_nonwear, "eda-process": cmd_eda,
            "activity": cmd_activity, "windows": cmd_windows, "bootstrap": cmd_bootstrap,
            "bench": cmd_bench,
        }
        if args.command == "compliance":
            cmd_compliance(args, cfg, out, err)
        else:
            handlers[args.command](args, cfg, out)
        return 0
    except UsageError as exc:
        print(exc, file=err)
        return 1
    except SystemExit as exc:  # --help
        return 0 if not exc.code else 1
    except (WearQCError, OSError) as exc:
        print(f"wearqc: error: {exc}", file=err)
        return 1
    except Exception:
        print("wearqc: internal error", file=err)
        traceback.print_exc(file=err)
        return 2


def main() -> None:
    sys.exit(run())
