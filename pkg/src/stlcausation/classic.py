"""Interval-robustness online monitoring and three-valued verdicts."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .engine import NAIVE, Engine, SteppingError
from .formula import (
    Always,
    And,
    Atom,
    Eventually,
    FalseConst,
    Formula,
    Not,
    Or,
    Until,
    eval_expr,
    grid_interval,
    horizon_samples,
)
from .oracle import robustness
from .trace import DomainBounds, PrefixView, Trace, atom_bounds

INF = math.inf


@dataclass(frozen=True)
class RobustnessInterval:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")

    def __neg__(self) -> "RobustnessInterval":
        return RobustnessInterval(-self.upper, -self.lower)

    def __iter__(self):
        yield self.lower
        yield self.upper

    def contains(self, r: float) -> bool:
        return self.lower <= r <= self.upper


def imin(a: RobustnessInterval, b: RobustnessInterval) -> RobustnessInterval:
    return RobustnessInterval(min(a.lower, b.lower), min(a.upper, b.upper))


def imax(a: RobustnessInterval, b: RobustnessInterval) -> RobustnessInterval:
    return RobustnessInterval(max(a.lower, b.lower), max(a.upper, b.upper))


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @property
    def symbol(self) -> str:
        return {"true": "⊤", "false": "⊥", "unknown": "?"}[self.value]


def derive_verdict(i: RobustnessInterval) -> Verdict:
    return verdict_of(i.lower, i.upper)


def verdict_of(lower: float, upper: float) -> Verdict:
    if upper < 0:
        return Verdict.FALSE
    if lower > 0:
        return Verdict.TRUE
    return Verdict.UNKNOWN


class ClassicMonitor:
    """Streaming robustness-interval monitor for a formula anchored at 0."""

    def __init__(
        self,
        formula: Formula,
        variables: Sequence[str],
        step: float = 1.0,
        bounds: Optional[DomainBounds] = None,
        kernel: str = NAIVE,
    ):
        self.engine = Engine(formula, variables, step, bounds, causation=False, kernel=kernel)

    @property
    def b_index(self) -> int:
        return self.engine.b

    def push(self, row: Sequence[float]) -> RobustnessInterval:
        """Consume the next sample row directly."""
        self.engine.step(row)
        return RobustnessInterval(*self.engine.interval())

    def step(self, view: PrefixView) -> RobustnessInterval:
        expect_next(self.engine.b, view)
        return self.push(view.row(view.b_index))

    def run(self, trace: Trace) -> list[RobustnessInterval]:
        return [self.step(trace.view(b)) for b in range(len(trace))]


def expect_next(b: int, view: PrefixView) -> None:
    if view.b_index != b + 1:
        raise SteppingError(f"expected prefix ending at {b + 1}, got {view.b_index}")


def clam_step(state: ClassicMonitor, view: PrefixView) -> RobustnessInterval:
    return state.step(view)


# ---------------------------------------------------------------------------
# Direct recursive evaluation, used as a test reference for the engine
# ---------------------------------------------------------------------------


def interval_at(
    view: PrefixView,
    f: Formula,
    tau: int = 0,
    bounds: Optional[DomainBounds] = None,
) -> RobustnessInterval:
    """Evaluate the interval clauses by plain recursion on the prefix."""
    return RobustnessInterval(*_interval_fn(view, bounds)(f, tau))


def _interval_fn(view: PrefixView, bounds: Optional[DomainBounds]):
    trace = view.trace
    names = trace.variables
    step = trace.step
    b = view.b_index

    @lru_cache(maxsize=None)
    def env(t):
        return dict(zip(names, view.row(t)))

    def ev(g: Formula, t: int) -> tuple:
        if isinstance(g, Atom):
            if t <= b:
                v = eval_expr(g.expr, env(t))
                return v, v
            lo, hi = atom_bounds(g, bounds)
            return max(lo, g.r_min), min(hi, g.r_max)
        if isinstance(g, FalseConst):
            return -INF, -INF
        if isinstance(g, Not):
            lo, hi = ev(g.arg, t)
            return -hi, -lo
        if isinstance(g, (And, Or)):
            a, c = ev(g.left, t), ev(g.right, t)
            op = min if isinstance(g, And) else max
            return op(a[0], c[0]), op(a[1], c[1])
        lo, hi = grid_interval(g.interval, step)
        window = range(t + lo, t + hi + 1)
        if isinstance(g, (Always, Eventually)):
            op = min if isinstance(g, Always) else max
            vals = [ev(g.arg, s) for s in window]
            return op(v[0] for v in vals), op(v[1] for v in vals)
        best_l = best_u = -INF
        for s in window:
            pre = [ev(g.left, r) for r in range(t, s)]
            pl = min((v[0] for v in pre), default=INF)
            pu = min((v[1] for v in pre), default=INF)
            l2, u2 = ev(g.right, s)
            best_l = max(best_l, min(l2, pl))
            best_u = max(best_u, min(u2, pu))
        return best_l, best_u

    return ev


def clam_offline_check(
    trace: Trace,
    f: Formula,
    bounds: Optional[DomainBounds] = None,
    kernel: str = NAIVE,
) -> RobustnessInterval:
    """Run the monitor over ``trace`` and compare with the offline robustness.

    Every intermediate interval must contain the final robustness and the
    last one must collapse onto it. Raises ``AssertionError`` naming the
    first offending step.
    """
    need = horizon_samples(f, trace.step) + 1
    if len(trace) < need:
        raise ValueError(f"trace has {len(trace)} samples, formula needs {need}")
    r = robustness(trace, f, 0)
    mon = ClassicMonitor(f, trace.variables, trace.step, bounds, kernel)
    last = None
    for b in range(len(trace)):
        last = mon.step(trace.view(b))
        if not last.contains(r):
            raise AssertionError(f"step {b}: interval {last} excludes robustness {r}")
    if not (last.lower == r and last.upper == r):
        raise AssertionError(f"step {len(trace) - 1}: interval {last} != [{r}, {r}]")
    return last
