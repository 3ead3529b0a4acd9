"""Command-line entry points: batch runs, report generation, live service."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .reporting import generate_report
from .runner import RunConfig, run_batch


def _setup_logging() -> None:
    level = os.environ.get("SAFESTOP_LOG", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = RunConfig.load(args.config)
    except (OSError, ValueError, TypeError) as exc:
        print(f"invalid run config: {exc}", file=sys.stderr)
        return 2
    if args.enabled:
        cfg.monitoring_enabled = True
    elif args.disabled:
        cfg.monitoring_enabled = False
    if args.trials is not None:
        cfg.trials = args.trials
    if args.seed is not None:
        cfg.seed_base = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    summary = run_batch(cfg)
    row = summary.table1_row()
    stops = summary.table2_row()
    print(f"{row['label']}: success {row['success_rate'] * 100:.0f}%  "
          f"velocity {row['velocity_mean']:.2f}±{row['velocity_sd']:.2f} m/s  "
          f"distance {row['distance_mean']:.2f}±{row['distance_sd']:.2f} m  "
          f"min {row['min_distance_mean']:.2f}±{row['min_distance_sd']:.2f} m  "
          f"stops {stops['stops_mean']:.1f}±{stops['stops_sd']:.1f}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    report = generate_report(args.in_dir, args.out)
    if report.get("empty"):
        print(report["message"])
        return 0
    sep = report["separability"]
    if sep["defined"]:
        print(f"report written to {args.out}: {report['n_monitor_points']} "
              f"monitor points, boundary accuracy {sep['accuracy']:.3f}")
    else:
        print(f"report written to {args.out}: separability undefined "
              f"({sep['n_triggered']} triggered points in band)")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    cfg = RunConfig.load(args.config)
    app = create_app(cfg)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safestop",
        description="Safe-stop collision monitoring simulator and service")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a batch of seeded trials")
    run_p.add_argument("--config", required=True)
    toggle = run_p.add_mutually_exclusive_group()
    toggle.add_argument("--enabled", action="store_true")
    toggle.add_argument("--disabled", action="store_true")
    run_p.add_argument("--trials", type=int)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--out")
    run_p.set_defaults(func=cmd_run)

    rep_p = sub.add_parser("report", help="build reports from trace logs")
    rep_p.add_argument("--in", dest="in_dir", required=True)
    rep_p.add_argument("--out", required=True)
    rep_p.set_defaults(func=cmd_report)

    srv_p = sub.add_parser("serve", help="run the live teleoperation service")
    srv_p.add_argument("--config", required=True)
    srv_p.add_argument("--port", type=int, default=8000)
    srv_p.add_argument("--host", default="127.0.0.1")
    srv_p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
