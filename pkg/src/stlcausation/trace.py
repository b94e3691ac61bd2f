"""Uniformly sampled, append-only signals and their prefixes."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, TextIO

from .formula import Abs, Add, Atom, Const, Expr, Mul, Neg, Sub, Var


class TraceError(ValueError):
    """Malformed samples or access outside what the trace holds."""


class BeyondPrefixError(TraceError, IndexError):
    pass


class EvictedError(TraceError, IndexError):
    pass


class Trace:
    """Samples ``k = 0, 1, ...`` at times ``t0 + k * step``.

    With ``retain`` set, only the newest ``retain + 1`` samples stay
    addressable; indices of later samples are unaffected.
    """

    def __init__(
        self,
        variables: Sequence[str],
        step: float = 1.0,
        t0: float = 0.0,
        retain: Optional[int] = None,
    ):
        if not step > 0 or not math.isfinite(step):
            raise TraceError(f"sampling step must be positive and finite, got {step}")
        names = list(variables)
        if len(set(names)) != len(names) or any(not n for n in names):
            raise TraceError(f"variable names must be unique and non-empty: {names}")
        self.variables = tuple(names)
        self.step = float(step)
        self.t0 = float(t0)
        self.retain = retain
        self._index = {name: i for i, name in enumerate(names)}
        self._rows: list[tuple] = []
        self._base = 0  # absolute index of self._rows[0]

    def __len__(self) -> int:
        return self._base + len(self._rows)

    @property
    def first_retained(self) -> int:
        return self._base

    def time_of(self, k: int) -> float:
        return self.t0 + k * self.step

    def column(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise TraceError(f"unknown variable {name!r}") from None

    def append(self, values: Sequence[float]) -> int:
        if len(values) != len(self.variables):
            raise TraceError(
                f"expected {len(self.variables)} values, got {len(values)}"
            )
        row = tuple(float(v) for v in values)
        for name, v in zip(self.variables, row):
            if not math.isfinite(v):
                raise TraceError(f"non-finite value {v} for {name!r} at sample {len(self)}")
        self._rows.append(row)
        if self.retain is not None:
            excess = len(self._rows) - (self.retain + 1)
            # trim in batches so appends stay amortized O(1)
            if excess > max(64, self.retain):
                del self._rows[:excess]
                self._base += excess
        return len(self) - 1

    def _check(self, k: int, limit: int) -> int:
        if k < 0 or k > limit:
            raise BeyondPrefixError(f"sample {k} is beyond the prefix ending at {limit}")
        if self.retain is not None and k < len(self) - 1 - self.retain:
            raise EvictedError(f"sample {k} has been evicted")
        if k < self._base:
            raise EvictedError(f"sample {k} has been evicted")
        return k - self._base

    def row(self, k: int) -> tuple:
        return self._rows[self._check(k, len(self) - 1)]

    def value(self, name: str, k: int) -> float:
        return self.row(k)[self.column(name)]

    def view(self, b_index: Optional[int] = None) -> "PrefixView":
        b = len(self) - 1 if b_index is None else b_index
        if b < 0 or b >= len(self):
            raise BeyondPrefixError(f"no sample {b} in a trace of length {len(self)}")
        return PrefixView(self, b)

    @classmethod
    def from_columns(
        cls, columns: Mapping[str, Sequence[float]], step: float = 1.0, t0: float = 0.0
    ) -> "Trace":
        names = list(columns)
        lengths = {len(columns[n]) for n in names}
        if len(lengths) > 1:
            raise TraceError(f"columns differ in length: {sorted(lengths)}")
        trace = cls(names, step=step, t0=t0)
        for row in zip(*(columns[n] for n in names)):
            trace.append(row)
        return trace


@dataclass(frozen=True)
class PrefixView:
    """The partial signal up to and including sample ``b_index``."""

    trace: Trace
    b_index: int

    def value_at(self, name: str, k: int) -> float:
        return self.trace.row(self._ok(k))[self.trace.column(name)]

    def row(self, k: int) -> tuple:
        return self.trace.row(self._ok(k))

    def _ok(self, k: int) -> int:
        if k < 0 or k > self.b_index:
            raise BeyondPrefixError(f"sample {k} is beyond the prefix ending at {self.b_index}")
        return k

    def env(self, k: int) -> dict:
        return dict(zip(self.trace.variables, self.row(k)))


def value_at(view: PrefixView, name: str, k: int) -> float:
    return view.value_at(name, k)


# ---------------------------------------------------------------------------
# Domain bounds
# ---------------------------------------------------------------------------


@dataclass
class DomainBounds:
    ranges: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, (lo, hi) in self.ranges.items():
            if lo > hi:
                raise ValueError(f"bounds for {name!r} are reversed: [{lo}, {hi}]")

    def get(self, name: str):
        return self.ranges.get(name)


def _imul(a: tuple, b: tuple) -> tuple:
    prods = []
    for x in a:
        for y in b:
            # 0 * inf contributes 0: the box is closed and bounded at 0
            prods.append(0.0 if (x == 0 or y == 0) else x * y)
    return min(prods), max(prods)


def expr_range(expr: Expr, bounds: DomainBounds) -> tuple:
    """Interval extension of ``expr`` over the variable box."""
    if isinstance(expr, Const):
        return expr.value, expr.value
    if isinstance(expr, Var):
        r = bounds.get(expr.name)
        return (-math.inf, math.inf) if r is None else (float(r[0]), float(r[1]))
    if isinstance(expr, Neg):
        lo, hi = expr_range(expr.arg, bounds)
        return -hi, -lo
    if isinstance(expr, Add):
        a, b = expr_range(expr.left, bounds), expr_range(expr.right, bounds)
        return _add(a[0], b[0], -math.inf), _add(a[1], b[1], math.inf)
    if isinstance(expr, Sub):
        a, b = expr_range(expr.left, bounds), expr_range(expr.right, bounds)
        return _add(a[0], -b[1], -math.inf), _add(a[1], -b[0], math.inf)
    if isinstance(expr, Mul):
        return _imul(expr_range(expr.left, bounds), expr_range(expr.right, bounds))
    if isinstance(expr, Abs):
        lo, hi = expr_range(expr.arg, bounds)
        if lo >= 0:
            return lo, hi
        if hi <= 0:
            return -hi, -lo
        return 0.0, max(-lo, hi)
    raise TypeError(f"not an expression: {expr!r}")


def _add(x: float, y: float, side: float) -> float:
    # inf + (-inf) only arises with unbounded variables; widen toward ``side``
    s = x + y
    return side if math.isnan(s) else s


def atom_bounds(atom: Atom, bounds: Optional[DomainBounds]) -> tuple:
    """A-priori ``(r_min, r_max)`` for ``atom`` over the bounded domain."""
    if bounds is None:
        return -math.inf, math.inf
    return expr_range(atom.expr, bounds)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


class TraceFormatError(TraceError):
    pass


def _parse_header(line: Sequence[str]) -> list[str]:
    header = [h.strip() for h in line]
    if not header or header[0] != "time":
        raise TraceFormatError("CSV header must start with 'time'")
    names = header[1:]
    if not names:
        raise TraceFormatError("CSV header declares no variables")
    if len(set(names)) != len(names) or any(not n for n in names):
        raise TraceFormatError(f"CSV header has empty or duplicate names: {names}")
    return names


def iter_csv(stream: TextIO, step: Optional[float] = None):
    """Yield ``(variables, step, t0)`` first, then one ``(k, values)`` per row.

    Rows are validated as they arrive so a line-buffered stream can be
    monitored at sample latency.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise TraceFormatError("empty trace: no header row") from None
    names = _parse_header(header)
    rows = _csv_rows(reader, len(names))
    try:
        first = next(rows)
    except StopIteration:
        raise TraceFormatError("empty trace: no samples") from None
    t0 = first[0]
    pending = [first]
    if step is None:
        try:
            second = next(rows)
        except StopIteration:
            second = None
        if second is None:
            step = 1.0
        else:
            step = second[0] - t0
            pending.append(second)
            if not step > 0:
                raise TraceFormatError(f"line 3: times must be strictly increasing")
    yield names, step, t0

    def all_rows():
        yield from pending
        yield from rows

    for k, (t, values, lineno) in enumerate(all_rows()):
        expected = t0 + k * step
        if abs(t - expected) > 1e-9 * step:
            raise TraceFormatError(
                f"line {lineno}: time {t} is off the sampling grid (expected {expected})"
            )
        yield k, values


def _csv_rows(reader, width: int) -> Iterator[tuple]:
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width + 1:
            raise TraceFormatError(f"line {lineno}: expected {width + 1} fields, got {len(row)}")
        try:
            nums = [float(c) for c in row]
        except ValueError:
            raise TraceFormatError(f"line {lineno}: non-numeric field") from None
        if not all(math.isfinite(v) for v in nums):
            raise TraceFormatError(f"line {lineno}: non-finite value")
        yield nums[0], tuple(nums[1:]), lineno


def read_csv(source, step: Optional[float] = None) -> Trace:
    """Load a whole CSV trace from a path or a text stream."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return _read(fh, step)
    return _read(source, step)


def _read(stream: TextIO, step: Optional[float]) -> Trace:
    it = iter_csv(stream, step)
    names, step, t0 = next(it)
    trace = Trace(names, step=step, t0=t0)
    for _, values in it:
        trace.append(values)
    return trace


def write_csv(trace: Trace, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["time", *trace.variables])
    for k in range(trace.first_retained, len(trace)):
        w.writerow([repr(trace.time_of(k)), *(repr(v) for v in trace.row(k))])


def csv_text(trace: Trace) -> str:
    buf = io.StringIO()
    write_csv(trace, buf)
    return buf.getvalue()
