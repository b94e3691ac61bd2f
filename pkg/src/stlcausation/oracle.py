"""Reference robust semantics over complete sampled traces.

Deliberately naive: every clause is a direct min/max over grid points, with
no sharing between instants. All monitors are checked against this module.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional

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
from .trace import PrefixView, Trace, TraceError

INF = math.inf


class InsufficientTraceError(TraceError):
    pass


def robustness(trace: Trace, f: Formula, k: int = 0) -> float:
    """Robustness of ``f`` at sample ``k``; needs samples up to ``k + horizon``."""
    need = k + horizon_samples(f, trace.step)
    if need >= len(trace):
        raise InsufficientTraceError(
            f"robustness at {k} needs samples up to {need}, trace has {len(trace)}"
        )
    names = trace.variables
    step = trace.step

    @lru_cache(maxsize=None)
    def env(t):
        return dict(zip(names, trace.row(t)))

    def rob(g: Formula, t: int) -> float:
        if isinstance(g, Atom):
            return eval_expr(g.expr, env(t))
        if isinstance(g, FalseConst):
            return -INF
        if isinstance(g, Not):
            return -rob(g.arg, t)
        if isinstance(g, And):
            return min(rob(g.left, t), rob(g.right, t))
        if isinstance(g, Or):
            return max(rob(g.left, t), rob(g.right, t))
        lo, hi = grid_interval(g.interval, step)
        if isinstance(g, Always):
            return min(rob(g.arg, s) for s in range(t + lo, t + hi + 1))
        if isinstance(g, Eventually):
            return max(rob(g.arg, s) for s in range(t + lo, t + hi + 1))
        best = -INF
        for s in range(t + lo, t + hi + 1):
            # inf over the empty range [t, t) is +inf
            prefix = min((rob(g.left, r) for r in range(t, s)), default=INF)
            best = max(best, min(rob(g.right, s), prefix))
        return best

    return rob(f, k)


def satisfies(trace: Trace, f: Formula, k: int = 0) -> bool:
    """Boolean semantics, atoms hold when their expression is strictly positive."""
    return kleene(trace.view(), f, k) is True


def kleene(view: PrefixView, f: Formula, k: int = 0) -> Optional[bool]:
    """Three-valued satisfaction on a prefix.

    Atoms at instants past the prefix are unknown (``None``); connectives use
    strong Kleene logic. No robustness values are involved.
    """
    trace = view.trace
    names = trace.variables
    step = trace.step
    b = view.b_index

    def atom(g: Atom, t: int) -> Optional[bool]:
        if t > b:
            return None
        return eval_expr(g.expr, dict(zip(names, view.row(t)))) > 0

    def conj(values) -> Optional[bool]:
        seen_unknown = False
        for v in values:
            if v is False:
                return False
            if v is None:
                seen_unknown = True
        return None if seen_unknown else True

    def disj(values) -> Optional[bool]:
        seen_unknown = False
        for v in values:
            if v is True:
                return True
            if v is None:
                seen_unknown = True
        return None if seen_unknown else False

    def neg(v):
        return None if v is None else not v

    def ev(g: Formula, t: int) -> Optional[bool]:
        if isinstance(g, Atom):
            return atom(g, t)
        if isinstance(g, FalseConst):
            return False
        if isinstance(g, Not):
            return neg(ev(g.arg, t))
        if isinstance(g, And):
            return conj([ev(g.left, t), ev(g.right, t)])
        if isinstance(g, Or):
            return disj([ev(g.left, t), ev(g.right, t)])
        lo, hi = grid_interval(g.interval, step)
        window = range(t + lo, t + hi + 1)
        if isinstance(g, Always):
            return conj([ev(g.arg, s) for s in window])
        if isinstance(g, Eventually):
            return disj([ev(g.arg, s) for s in window])
        return disj(
            [conj([ev(g.right, s)] + [ev(g.left, r) for r in range(t, s)]) for s in window]
        )

    return ev(f, k)
