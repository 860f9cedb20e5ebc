"""Command-line interface.

Subcommands cover the full workflow: ingest raw logs, generate a training
corpus from simulation, train the detector, run single simulations, sweep the
full campaign matrix, and aggregate run files into a report.
"""

from __future__ import annotations

import argparse
import sys

from . import campaign as camp
from .config import dump_config, load_config
from .features import windows_from_records, WindowReport, save_windows
from .ingest import (
    LABEL_NAMES,
    merge_and_label,
    parse_ground_truth,
    parse_log_stream,
    write_canonical_csv,
    write_skip_report,
)
from .injector import KIND_LABELS
from .model_io import load_model
from .sim import run_sim, write_trace

import numpy as np


def _parse_kind(text):
    if text in KIND_LABELS:
        return KIND_LABELS[text]
    if text in ("regular", "0"):
        return 0
    try:
        kind = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown kind {text!r}; expected 0..8 or one of {', '.join(KIND_LABELS)}")
    if not 0 <= kind <= 8:
        raise argparse.ArgumentTypeError(f"kind label {kind} outside 0..8")
    return kind


def _parse_label(text):
    if text in LABEL_NAMES:
        return LABEL_NAMES.index(text)
    return _parse_kind(text)


def _add_config_arg(p):
    p.add_argument("--config", default=None, help="key=value configuration file")


def _log(args):
    if args.quiet:
        return None
    return lambda msg: print(msg, flush=True)


def cmd_ingest(args):
    truth_skips = []
    conflicts = []
    with open(args.truth) as fh:
        truth, truth_skips, conflicts = parse_ground_truth(fh)
    all_records = []
    log_skips = []
    missing_all = []
    for spec in args.logs:
        if ":" not in spec:
            print(f"error: expected LOG:RX, got {spec!r}", file=sys.stderr)
            return 2
        path, rx = spec.rsplit(":", 1)
        with open(path) as fh:
            parsed = parse_log_stream(fh, int(rx))
        log_skips.extend((f"{path}:{lineno}", reason) for lineno, reason in parsed.skips)
        records, missing = merge_and_label(parsed.messages, truth, args.label)
        missing_all.extend(missing)
        all_records.extend(records)
    write_canonical_csv(args.out, all_records)
    if args.report:
        write_skip_report(args.report, log_skips, truth_skips, conflicts, missing_all)
    if args.windows:
        report = WindowReport()
        windows = windows_from_records(all_records, report)
        if not windows:
            print("error: no complete windows in the ingested records", file=sys.stderr)
            return 2
        X = np.stack([w.rows for w in windows])
        y = np.array([w.label for w in windows], dtype=np.int64)
        save_windows(args.windows, X, y)
        if not args.quiet and report.rejected:
            print(f"rejected {len(report.rejected)} windows (non-monotone timestamps)")
    if not args.quiet:
        print(f"wrote {len(all_records)} canonical records to {args.out}")
    return 0


def cmd_gen_data(args):
    cfg = load_config(args.config)
    camp.generate_training_corpus(cfg, args.out, log=_log(args))
    return 0


def cmd_train(args):
    cfg = load_config(args.config)
    camp.train_detector(cfg, args.corpus, args.out, history_path=args.history,
                        scaler_path=args.scaler, log=_log(args))
    return 0


def cmd_simulate(args):
    cfg = load_config(args.config)
    defense = args.defense == "on"
    model = load_model(args.model) if (args.model and defense) else None
    rc = camp.sim_config(cfg, args.size, args.kind, args.attacker, defense, args.rep)
    res = run_sim(rc, model=model, collect_trace=args.trace is not None)
    d = camp.result_to_dict(res)
    with open(args.out, "w") as fh:
        fh.write(camp.dump_result_json(d))
    if args.trace:
        write_trace(args.trace, res)
    if not args.quiet:
        npred = len(d["predictions"])
        print(f"run complete: accident={d['accident']}, collisions={len(d['collisions'])}, "
              f"predictions={npred}; result in {args.out}")
    return 0


def cmd_campaign(args):
    cfg = load_config(args.config)
    model = load_model(args.model)
    camp.run_campaign(cfg, model, args.out, log=_log(args))
    return 0


def cmd_report(args):
    results = camp.load_results(args.runs)
    camp.write_report(results, args.out, log=_log(args))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="platoonguard",
        description="Platoon misbehavior detection: simulate, inject, detect, defend.",
    )
    parser.add_argument("--dump-config", action="store_true",
                        help="print the default configuration and exit")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="merge raw logs with ground truth into canonical records")
    p.add_argument("logs", nargs="+", metavar="LOG:RX",
                   help="message log path and its receiver id, colon-separated")
    p.add_argument("--truth", required=True, help="ground-truth JSON-lines file")
    p.add_argument("--label", type=_parse_label, default=0,
                   help="scenario label for falsified records (name or 0..8)")
    p.add_argument("--out", required=True, help="canonical CSV output path")
    p.add_argument("--report", default=None, help="skip/conflict report path")
    p.add_argument("--windows", default=None, help="also cut windows to this tensor file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("gen-data", help="simulate labeled streams into a training corpus")
    _add_config_arg(p)
    p.add_argument("--out", required=True, help="window tensor output path")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train the detector on a window corpus")
    _add_config_arg(p)
    p.add_argument("--corpus", required=True, help="window tensor file from gen-data")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--history", default=None, help="per-epoch metrics table path")
    p.add_argument("--scaler", default=None, help="write scaler parameters as text")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="run one simulation")
    _add_config_arg(p)
    p.add_argument("--size", type=int, required=True, help="platoon size")
    p.add_argument("--kind", type=_parse_kind, default=0,
                   help="misbehavior kind (name or 0..8; 0 = regular)")
    p.add_argument("--attacker", type=int, default=-1, help="misbehaving vehicle index")
    p.add_argument("--defense", choices=("on", "off"), default="off")
    p.add_argument("--rep", type=int, default=0, help="repetition index (seeds the run)")
    p.add_argument("--model", default=None, help="detector model (needed with --defense on)")
    p.add_argument("--out", required=True, help="run result JSON path")
    p.add_argument("--trace", default=None, help="write per-tick vehicle trace table here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("campaign", help="run the full evaluation matrix")
    _add_config_arg(p)
    p.add_argument("--model", required=True, help="trained detector model")
    p.add_argument("--out", required=True, help="output directory for run files")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("report", help="aggregate campaign run files into a report")
    p.add_argument("--runs", required=True, help="campaign output directory")
    p.add_argument("--out", required=True, help="report output directory")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_config:
        print(dump_config(), end="")
        return 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
