"""Batch driver: validate, replay, KPIs, simulations and rehandle analytics.

Exit codes: 0 success, 1 domain violations or replay failures, 2 usage
errors (bad flags, missing files, malformed timestamps). Machine-readable
output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analytics import rehandle_table
from .engine import SimulationJob, Step, compare_runs, counterfactual_run, state_at
from .errors import ParseError, YardTwinError
from .events import load_log, validate_against
from .kpi import kpi_report, rehandle_histogram_csv
from .model import YardLayout, canonical_json, parse_timestamp
from .strategies import StrategySpec, make_strategy

USAGE_ERROR = 2
DOMAIN_ERROR = 1


def _load_layout(path, parser):
    try:
        return YardLayout.from_file(path)
    except OSError as exc:
        parser.error(f"cannot read layout: {exc}")
    except (ValueError, KeyError) as exc:
        parser.error(f"bad layout file: {exc}")


def _load_log(path, parser):
    try:
        return load_log(path)
    except OSError as exc:
        parser.error(f"cannot read log: {exc}")
    except ParseError as exc:
        print(f"log parse error: {exc}", file=sys.stderr)
        raise SystemExit(DOMAIN_ERROR) from None


def _parse_ts(raw, parser, flag):
    try:
        return parse_timestamp(raw)
    except ValueError as exc:
        parser.error(f"{flag}: {exc}")


def _window(args, parser):
    time_from = _parse_ts(args.time_from, parser, "--from")
    time_to = _parse_ts(args.time_to, parser, "--to")
    if time_from > time_to:
        parser.error("--from must be <= --to")
    return time_from, time_to


def _strategy_spec(raw, parser) -> StrategySpec:
    try:
        if raw.strip().startswith("{"):
            spec = StrategySpec.from_dict(json.loads(raw))
        else:
            spec = StrategySpec(raw.strip())
        make_strategy(spec)
        return spec
    except json.JSONDecodeError as exc:
        parser.error(f"--strategy: invalid JSON: {exc}")
    except YardTwinError as exc:
        parser.error(f"--strategy: {exc}")


def cmd_validate(args, parser):
    layout = _load_layout(args.layout, parser)
    log = _load_log(args.log, parser)
    violations = validate_against(log, layout)
    for violation in violations:
        print(violation, file=sys.stderr)
    return DOMAIN_ERROR if violations else 0


def cmd_kpi(args, parser):
    layout = _load_layout(args.layout, parser)
    log = _load_log(args.log, parser)
    report = kpi_report(log, layout, _window(args, parser))
    if args.format == "csv":
        sys.stdout.write(rehandle_histogram_csv(report))
    else:
        print(report.to_json())
    return 0


def cmd_snapshot(args, parser):
    layout = _load_layout(args.layout, parser)
    log = _load_log(args.log, parser)
    at = _parse_ts(args.at, parser, "--at")
    print(state_at(log, layout, at).snapshot_json())
    return 0


def cmd_simulate(args, parser):
    layout = _load_layout(args.layout, parser)
    log = _load_log(args.log, parser)
    time_from, time_to = _window(args, parser)
    spec = _strategy_spec(args.strategy, parser)
    job = SimulationJob(
        job_id="cli",
        time_from=time_from,
        time_to=time_to,
        step=Step(args.step),
        strategy=spec,
        seed=args.seed,
    )
    simulated = counterfactual_run(log, layout, job)
    if args.emit_log:
        with open(args.emit_log, "w", encoding="utf-8") as fh:
            fh.write(simulated.to_jsonl())
    comparison = compare_runs(log, simulated, layout, (time_from, time_to))
    print(comparison.to_json())
    return 0


def cmd_rehandles(args, parser):
    if args.kmax is not None and args.kmax < 1:
        parser.error("--kmax must be >= 1")
    table = rehandle_table(
        rows=args.rows, max_tier=args.tiers, kmax=args.kmax, trials=args.trials, seed=args.seed
    )
    if args.format == "json":
        print(canonical_json(table))
        return 0
    columns = ["R", "T", "k", "v_k", "v_to_empty", "mc_mean", "mc_se", "trials", "seed"]
    print(",".join(columns))
    for row in table:
        print(",".join(_csv_cell(row[c]) for c in columns))
    return 0


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_serve(args, parser):
    import uvicorn

    from .api import create_app

    layout = _load_layout(args.layout, parser)
    log = _load_log(args.log, parser)
    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        parser.error("--listen must look like HOST:PORT")
    app = create_app(layout, log, workers=args.workers, console_dir=args.console)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yardtwin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def io_flags(p, window=False):
        p.add_argument("--layout", required=True, help="layout JSON file")
        p.add_argument("--log", required=True, help="event log (JSONL)")
        if window:
            p.add_argument("--from", dest="time_from", required=True, help="window start (ISO-8601)")
            p.add_argument("--to", dest="time_to", required=True, help="window end (ISO-8601)")

    p = sub.add_parser("validate", help="check a log against a layout")
    io_flags(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("kpi", help="KPI report over a window")
    io_flags(p, window=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(fn=cmd_kpi)

    p = sub.add_parser("snapshot", help="yard snapshot at an instant")
    io_flags(p)
    p.add_argument("--at", required=True, help="instant (ISO-8601)")
    p.set_defaults(fn=cmd_snapshot)

    p = sub.add_parser("simulate", help="counterfactual run + KPI comparison")
    io_flags(p, window=True)
    p.add_argument("--strategy", required=True, help="strategy name or JSON spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", choices=[s.value for s in Step], default="EVENT")
    p.add_argument("--emit-log", help="also write the simulated JSONL here")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("rehandles", help="expected-rehandle table with Monte Carlo check")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--tiers", type=int, required=True)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(fn=cmd_rehandles)

    p = sub.add_parser("serve", help="run the HTTP service")
    io_flags(p)
    p.add_argument("--listen", default="127.0.0.1:8630")
    p.add_argument("--workers", type=int, default=2)
    p.add_argument("--console", default=None, help="static console assets to serve at /")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, parser)
    except YardTwinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DOMAIN_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
