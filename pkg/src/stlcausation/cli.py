"""Command-line front end.

``monitor --spec FILE --trace FILE|- ...`` streams one record per sample.
``monitor bench NAME [TRACE]`` times all four monitors on a benchmark spec.
``monitor gen-trace KIND`` writes a synthetic CSV trace to standard output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence, TextIO

from . import bench as benchmod
from .engine import DEQUE, KERNELS
from .formula import FormulaError, parse_formula, variables
from .runner import MONITORS, RECORD_FIELDS, CrossCheck, StepRecord, Summary, fmt_float
from .trace import DomainBounds, TraceError, iter_csv, read_csv, write_csv

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_PARSE = 2
EXIT_TRACE = 3

PLOT_SERIES = ("upper", "lower", "vio_distance", "sat_distance")
_FLOAT_FIELDS = {"t", "upper", "lower", "vio_distance", "sat_distance"}
_INT_FIELDS = {"b", "episode", "monitor_time_ns"}


# ---------------------------------------------------------------------------
# Record encoding
# ---------------------------------------------------------------------------


def record_json(r: StepRecord) -> str:
    # Python's json writes Infinity/-Infinity for unbounded values and reads them back
    return json.dumps(r.as_dict())


def record_csv_row(r: StepRecord) -> list[str]:
    out = []
    for name in RECORD_FIELDS:
        v = getattr(r, name)
        if v is None:
            out.append("")
        elif isinstance(v, bool):
            out.append("true" if v else "false")
        elif isinstance(v, float):
            out.append(fmt_float(v))
        else:
            out.append(str(v))
    return out


def parse_records(text: str, fmt: str) -> list[dict]:
    """Read emitted records back into dicts with typed values."""
    if fmt == "json":
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        rec = {}
        for name in RECORD_FIELDS:
            cell = row[name]
            if cell == "":
                rec[name] = None
            elif name in _FLOAT_FIELDS:
                rec[name] = float(cell)
            elif name in _INT_FIELDS:
                rec[name] = int(cell)
            elif name == "boundary":
                rec[name] = cell == "true"
            else:
                rec[name] = cell
        out.append(rec)
    return out


class PlotWriter:
    """Tidy ``t,series,value`` rows; each series comes from the first record carrying it."""

    def __init__(self, stream: TextIO):
        self.stream = stream
        self.writer = csv.writer(stream, lineterminator="\n")
        self.writer.writerow(["t", "series", "value"])

    def add(self, records: Sequence[StepRecord]) -> None:
        done = set()
        for r in records:
            for series in PLOT_SERIES:
                v = getattr(r, series)
                if v is not None and series not in done:
                    done.add(series)
                    self.writer.writerow([fmt_float(r.t), series, fmt_float(v)])


# ---------------------------------------------------------------------------
# Run mode
# ---------------------------------------------------------------------------


def _run_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="monitor",
        description="Monitor a CSV trace against a formula. "
        "Subcommands: 'monitor bench ...', 'monitor gen-trace ...'.",
    )
    p.add_argument("--spec", required=True, help="file holding the formula ('#' starts a comment)")
    p.add_argument("--trace", required=True, help="CSV trace file, or '-' for standard input")
    p.add_argument("--monitor", choices=MONITORS + ("all",), default="all")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--delta", type=float, help="sampling step; default: inferred from the times")
    p.add_argument("--bounds", help='JSON file {"var": [lo, hi], ...} with signal ranges')
    p.add_argument("--plot-out", help="write t,series,value rows here")
    p.add_argument("--kernel", choices=KERNELS, default=DEQUE)
    p.add_argument(
        "--no-reset-on-satisfaction",
        action="store_true",
        help="the reset monitor restarts only after violations",
    )
    return p


def read_spec(path: str) -> str:
    with open(path) as fh:
        lines = [line.split("#", 1)[0] for line in fh]
    return "".join(lines)


def load_bounds(path: str) -> DomainBounds:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("bounds file must hold a JSON object")
    ranges = {}
    for name, pair in raw.items():
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ValueError(f"bounds for {name!r} must be a [lo, hi] pair")
        ranges[name] = (float(pair[0]), float(pair[1]))
    return DomainBounds(ranges)


def run(args: argparse.Namespace, stdin: TextIO, stdout: TextIO, stderr: TextIO) -> int:
    from .runner import MonitorSet

    try:
        formula = parse_formula(read_spec(args.spec))
    except FormulaError as e:
        print(f"monitor: {args.spec}: {e}", file=stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"monitor: cannot read spec: {e}", file=stderr)
        return EXIT_PARSE
    bounds = None
    if args.bounds:
        try:
            bounds = load_bounds(args.bounds)
        except (OSError, ValueError) as e:
            print(f"monitor: bad bounds file {args.bounds}: {e}", file=stderr)
            return EXIT_PARSE
    if args.delta is not None and not args.delta > 0:
        print("monitor: --delta must be positive", file=stderr)
        return EXIT_PARSE

    fh = None
    try:
        if args.trace == "-":
            src = stdin
        else:
            fh = src = open(args.trace, newline="")
        return _stream(args, formula, bounds, src, stdout, stderr, MonitorSet)
    except OSError as e:
        print(f"monitor: cannot read trace: {e}", file=stderr)
        return EXIT_TRACE
    finally:
        if fh is not None:
            fh.close()


def _stream(args, formula, bounds, src, stdout, stderr, MonitorSet) -> int:
    plot_fh = None
    try:
        rows = iter_csv(src, args.delta)
        names, step, t0 = next(rows)
        missing = variables(formula) - set(names)
        if missing:
            print(f"monitor: trace lacks columns {sorted(missing)}", file=stderr)
            return EXIT_TRACE
        ms = MonitorSet(
            formula, names, args.monitor, step, t0, bounds, args.kernel,
            reset_on_satisfaction=not args.no_reset_on_satisfaction,
        )
        writer = None
        if args.format == "csv":
            writer = csv.writer(stdout, lineterminator="\n")
            writer.writerow(RECORD_FIELDS)
        plot = None
        if args.plot_out:
            plot_fh = open(args.plot_out, "w", newline="")
            plot = PlotWriter(plot_fh)
        summary = Summary()
        check = CrossCheck() if args.monitor == "all" else None
        for _, values in rows:
            records = ms.push(values)
            for r in records:
                if writer is None:
                    stdout.write(record_json(r) + "\n")
                else:
                    writer.writerow(record_csv_row(r))
            stdout.flush()
            summary.add(records)
            if check is not None:
                check.add(records)
            if plot is not None:
                plot.add(records)
    except TraceError as e:
        stdout.flush()
        print(f"monitor: trace error: {e}", file=stderr)
        return EXIT_TRACE
    finally:
        if plot_fh is not None:
            plot_fh.close()
    for line in summary.lines():
        print(f"# {line}", file=stderr)
    if check is not None:
        if not check.ok:
            print(f"# cross-check mismatches: {check.mismatches}", file=stderr)
            return EXIT_CHECK
        print("# cross-checks: ok", file=stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench and gen-trace
# ---------------------------------------------------------------------------


def _bench_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="monitor bench", description="Time all monitors on a spec.")
    p.add_argument("name", choices=sorted(benchmod.SPECS))
    p.add_argument("trace", nargs="?", help="CSV trace; default: a synthetic one")
    p.add_argument("--kernel", choices=KERNELS, default=DEQUE)
    return p


def _default_trace(name: str):
    if name == "AT1":
        return benchmod.at_trace()
    return benchmod.afc_trace()


def bench_main(argv: Sequence[str], stdout: TextIO, stderr: TextIO) -> int:
    args = _bench_parser().parse_args(argv)
    try:
        trace = read_csv(args.trace) if args.trace else _default_trace(args.name)
        report = benchmod.bench(args.name, trace, kernel=args.kernel)
    except OSError as e:
        print(f"monitor bench: cannot read trace: {e}", file=stderr)
        return EXIT_TRACE
    except TraceError as e:
        print(f"monitor bench: {e}", file=stderr)
        return EXIT_TRACE
    for line in report.lines():
        print(line, file=stdout)
    return EXIT_OK if report.checks_ok else EXIT_CHECK


def _gen_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="monitor gen-trace", description="Write a synthetic trace.")
    p.add_argument("kind", choices=("at", "afc", "perf", "speed"))
    p.add_argument("--samples", type=int, default=100_000, help="perf traces only")
    p.add_argument("--duration", type=float, help="at/afc traces: time span")
    p.add_argument("--step", type=float, default=0.1, help="at/afc traces: sampling step")
    p.add_argument(
        "--excursion",
        action="append",
        metavar="A,B",
        help="time span of an excursion (repeatable); default: the generator's own",
    )
    p.add_argument("--seed", type=int, default=0)
    return p


def _span(text: str) -> tuple:
    a, b = (float(x) for x in text.split(","))
    return a, b


def gen_main(argv: Sequence[str], stdout: TextIO, stderr: TextIO) -> int:
    parser = _gen_parser()
    args = parser.parse_args(argv)
    kw: dict = {"seed": args.seed}
    if args.kind in ("at", "afc"):
        kw["step"] = args.step
        if args.duration is not None:
            kw["duration"] = args.duration
        if args.excursion:
            try:
                kw["excursions"] = tuple(_span(x) for x in args.excursion)
            except ValueError:
                parser.error("--excursion takes two comma-separated numbers")
    if args.kind == "at":
        trace = benchmod.at_trace(**kw)
    elif args.kind == "afc":
        trace = benchmod.afc_trace(**kw)
    elif args.kind == "perf":
        trace = benchmod.perf_trace(args.samples, seed=args.seed)
    else:
        trace = benchmod.speed_limit_trace()
    write_csv(trace, stdout)
    return EXIT_OK


def main(
    argv: Optional[Sequence[str]] = None,
    stdin: Optional[TextIO] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if argv and argv[0] == "bench":
        return bench_main(argv[1:], stdout, stderr)
    if argv and argv[0] == "gen-trace":
        return gen_main(argv[1:], stdout, stderr)
    args = _run_parser().parse_args(argv)
    return run(args, stdin, stdout, stderr)


def entry() -> None:
    try:
        sys.exit(main())
    except BrokenPipeError:
        sys.exit(EXIT_OK)


if __name__ == "__main__":
    entry()
