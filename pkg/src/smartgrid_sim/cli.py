"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 internal invariant failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .engine import emit_report, emit_trace, simulate
from .errors import InternalInvariantError, ParseError, ValidationError
from .scenario import load_scenario_file

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INTERNAL = 2
EXIT_IO = 3


def _summary(name: str, report) -> str:
    b = report.bill
    return (f"{name}: ticks={report.ticks} import={b.import_peak_kwh + b.import_offpeak_kwh:.6f}kWh "
            f"export={b.export_kwh:.6f}kWh total={b.total:.6f} "
            f"disconnects={report.event_counts['Disconnect']}")


def _run_one(path: Path, trace: Path | None, report_path: Path | None) -> tuple[int, str]:
    try:
        scenario = load_scenario_file(path)
    except OSError as exc:
        return EXIT_IO, f"{path}: {exc}"
    except (ParseError, ValidationError) as exc:
        return EXIT_INVALID, f"{path}: {exc}"
    try:
        records, report = simulate(scenario)
    except InternalInvariantError as exc:
        return EXIT_INTERNAL, f"{path}: internal invariant failure at {exc}"
    try:
        if trace is not None:
            with open(trace, "wb") as fh:
                emit_trace(records, fh)
        if report_path is not None:
            with open(report_path, "wb") as fh:
                emit_report(report, fh)
    except OSError as exc:
        return EXIT_IO, f"{path}: {exc}"
    return EXIT_OK, _summary(path.name, report)


def _batch_job(args: tuple[str, str | None]) -> tuple[str, int, str]:
    path, out = args
    p = Path(path)
    trace = report = None
    if out is not None:
        trace = Path(out) / f"{p.stem}.trace.csv"
        report = Path(out) / f"{p.stem}.report.json"
    code, msg = _run_one(p, trace, report)
    return path, code, msg


def cmd_simulate(args) -> int:
    code, msg = _run_one(Path(args.scenario), args.trace, args.report)
    if code != EXIT_OK:
        print(msg, file=sys.stderr)
    elif not args.quiet:
        print(msg)
    return code


def cmd_validate(args) -> int:
    try:
        load_scenario_file(args.scenario)
    except OSError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParseError, ValidationError) as exc:
        print(exc)
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def cmd_batch(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        print(f"{directory}: not a directory", file=sys.stderr)
        return EXIT_IO
    if args.out is not None:
        try:
            Path(args.out).mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            print(f"{args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    files = sorted(str(p) for p in directory.glob("*.json"))
    jobs = [(f, args.out) for f in files]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_batch_job, jobs))
    else:
        results = [_batch_job(j) for j in jobs]
    worst = EXIT_OK
    for _, code, msg in results:
        print(msg, file=sys.stdout if code == EXIT_OK else sys.stderr)
        worst = max(worst, code)
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smartgrid-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario")
    p.add_argument("scenario")
    p.add_argument("--trace", type=Path, help="write the per-tick trace CSV here")
    p.add_argument("--report", type=Path, help="write the run report JSON here")
    p.add_argument("--quiet", action="store_true", help="print nothing on success")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="check a scenario document")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("batch", help="run every *.json scenario in a directory")
    p.add_argument("directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="directory for <name>.trace.csv and <name>.report.json")
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
