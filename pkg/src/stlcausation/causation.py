"""Quantitative causation monitoring.

At every step the monitor reports two distances for the newest sample: how
far it is from being a cause of violation (``vio_distance``, negative when
it is one) and from being a cause of satisfaction (``sat_distance``,
positive when it is one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .classic import RobustnessInterval, _interval_fn, expect_next
from .engine import NAIVE, Engine
from .epochs import CausationVerdict
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
)
from .trace import DomainBounds, PrefixView, Trace, atom_bounds

INF = math.inf


@dataclass(frozen=True)
class CausationOutput:
    b: int
    vio_distance: float
    sat_distance: float
    derived_verdict: CausationVerdict
    running_upper: float
    running_lower: float
    boundary: bool = False


def derive_bcaum(o: CausationOutput) -> CausationVerdict:
    return _sign_verdict(o.vio_distance, o.sat_distance)[0]


def _sign_verdict(vio: float, sat: float) -> tuple:
    """Verdict and whether a zero distance forced it to irrelevant."""
    if vio < 0:
        return CausationVerdict.VIOLATION, False
    if sat > 0:
        return CausationVerdict.SATISFACTION, False
    return CausationVerdict.IRRELEVANT, (vio == 0 or sat == 0)


def reconstruct_clam(outputs: Iterable[CausationOutput]) -> list[RobustnessInterval]:
    """Rebuild the robustness intervals as running extrema of the distances."""
    out = []
    upper, lower = INF, -INF
    for o in outputs:
        upper = min(upper, o.vio_distance)
        lower = max(lower, o.sat_distance)
        out.append(RobustnessInterval(lower, upper))
    return out


class QuantitativeCausationMonitor:
    """Causation distances computed alongside the robustness intervals they mix in."""

    def __init__(
        self,
        formula: Formula,
        variables: Sequence[str],
        step: float = 1.0,
        bounds: Optional[DomainBounds] = None,
        kernel: str = NAIVE,
    ):
        self.engine = Engine(formula, variables, step, bounds, causation=True, kernel=kernel)
        self._upper = INF
        self._lower = -INF

    @property
    def b_index(self) -> int:
        return self.engine.b

    def push(self, row: Sequence[float]) -> CausationOutput:
        eng = self.engine
        eng.step(row)
        vio, sat = eng.distances()
        if vio < self._upper:
            self._upper = vio
        if sat > self._lower:
            self._lower = sat
        verdict, boundary = _sign_verdict(vio, sat)
        return CausationOutput(eng.b, vio, sat, verdict, self._upper, self._lower, boundary)

    def step(self, view: PrefixView) -> CausationOutput:
        expect_next(self.engine.b, view)
        return self.push(view.row(view.b_index))

    def interval(self) -> RobustnessInterval:
        """The robustness interval from the shared table at the current step."""
        return RobustnessInterval(*self.engine.interval())

    def run(self, trace: Trace) -> list[CausationOutput]:
        return [self.step(trace.view(b)) for b in range(len(trace))]


def qcaum_step(state: QuantitativeCausationMonitor, view: PrefixView) -> CausationOutput:
    return state.step(view)


# ---------------------------------------------------------------------------
# Direct recursive evaluation, used as a test reference for the engine
# ---------------------------------------------------------------------------


def distances_at(
    view: PrefixView, f: Formula, tau: int = 0, bounds: Optional[DomainBounds] = None
) -> tuple:
    """``(vio_distance, sat_distance)`` of ``f`` at ``tau`` by plain recursion."""
    trace = view.trace
    names = trace.variables
    step = trace.step
    b = view.b_index
    bounds_of = _interval_fn(view, bounds)

    def U(g, t):
        return bounds_of(g, t)[1]

    def L(g, t):
        return bounds_of(g, t)[0]

    def vio(g: Formula, t: int) -> float:
        if isinstance(g, Atom):
            if t == b:
                return eval_expr(g.expr, dict(zip(names, view.row(t))))
            return min(atom_bounds(g, bounds)[1], g.r_max)
        if isinstance(g, FalseConst):
            return INF
        if isinstance(g, Not):
            return -sat(g.arg, t)
        if isinstance(g, And):
            return min(vio(g.left, t), vio(g.right, t))
        if isinstance(g, Or):
            return min(max(vio(g.left, t), U(g.right, t)), max(U(g.left, t), vio(g.right, t)))
        lo, hi = grid_interval(g.interval, step)
        window = range(t + lo, t + hi + 1)
        if isinstance(g, Always):
            return min(vio(g.arg, s) for s in window)
        if isinstance(g, Eventually):
            whole = U(g, t)
            return min(max(vio(g.arg, s), whole) for s in window)
        whole = U(g, t)
        return min(
            max(
                min(min((vio(g.left, r) for r in range(t, s)), default=INF), vio(g.right, s)),
                whole,
            )
            for s in window
        )

    def sat(g: Formula, t: int) -> float:
        if isinstance(g, Atom):
            if t == b:
                return eval_expr(g.expr, dict(zip(names, view.row(t))))
            return max(atom_bounds(g, bounds)[0], g.r_min)
        if isinstance(g, FalseConst):
            return -INF
        if isinstance(g, Not):
            return -vio(g.arg, t)
        if isinstance(g, And):
            return max(min(sat(g.left, t), L(g.right, t)), min(L(g.left, t), sat(g.right, t)))
        if isinstance(g, Or):
            return max(sat(g.left, t), sat(g.right, t))
        lo, hi = grid_interval(g.interval, step)
        window = range(t + lo, t + hi + 1)
        if isinstance(g, Always):
            whole = L(g, t)
            return max(min(sat(g.arg, s), whole) for s in window)
        if isinstance(g, Eventually):
            return max(sat(g.arg, s) for s in window)
        best = -INF
        for s in window:
            sup_s1 = max((sat(g.left, r) for r in range(t, s)), default=-INF)
            inf_l1 = min((L(g.left, r) for r in range(t, s)), default=INF)
            term = max(min(sup_s1, inf_l1, L(g.right, s)), min(inf_l1, sat(g.right, s)))
            best = max(best, term)
        return best

    return vio(f, tau), sat(f, tau)
