"""Violation and satisfaction epochs, and the Boolean causation monitor.

An epoch is a set of ``(atom_id, instant)`` pairs naming the atom
evaluations responsible for the current violation (or satisfaction).
Disjunction and eventually have no clauses of their own in the usual
presentation; here they follow from De Morgan duality:

* violating ``a or b`` requires both sides violated, so its violation epoch
  is the union of both sides' violation epochs;
* satisfying ``a or b`` collects the satisfaction epochs of the satisfied
  sides only;
* ``ev`` mirrors this over its window.
"""

from __future__ import annotations

import enum
from typing import Optional, Sequence

from .classic import _interval_fn, expect_next
from .engine import NAIVE, Engine, _Node
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
    grid_interval,
)
from .trace import DomainBounds, PrefixView, Trace

Epoch = frozenset


class CausationVerdict(enum.Enum):
    VIOLATION = "vio"
    SATISFACTION = "sat"
    IRRELEVANT = "irrelevant"

    @property
    def symbol(self) -> str:
        return {"vio": "⊖", "sat": "⊕", "irrelevant": "⊘"}[self.value]


# ---------------------------------------------------------------------------
# Full epoch sets by direct recursion on the prefix
# ---------------------------------------------------------------------------


def violation_epoch(
    view: PrefixView, f: Formula, k: int = 0, bounds: Optional[DomainBounds] = None
) -> Epoch:
    return _epochs(view, bounds)[0](f, k)


def satisfaction_epoch(
    view: PrefixView, f: Formula, k: int = 0, bounds: Optional[DomainBounds] = None
) -> Epoch:
    return _epochs(view, bounds)[1](f, k)


def _epochs(view: PrefixView, bounds: Optional[DomainBounds]):
    bounds_of = _interval_fn(view, bounds)
    step = view.trace.step
    empty: frozenset = frozenset()

    def vio(g: Formula, t: int) -> frozenset:
        if not bounds_of(g, t)[1] < 0:
            return empty
        if isinstance(g, Atom):
            return frozenset({(g.id, t)})
        if isinstance(g, FalseConst):
            return empty
        if isinstance(g, Not):
            return sat(g.arg, t)
        if isinstance(g, (And, Or)):
            # for "or" both operands are violated once the guard holds
            return vio(g.left, t) | vio(g.right, t)
        lo, hi = grid_interval(g.interval, step)
        if isinstance(g, (Always, Eventually)):
            out = set()
            for s in range(t + lo, t + hi + 1):
                out |= vio(g.arg, s)
            return frozenset(out)
        out = set()
        for s in range(t + lo, t + hi + 1):
            prefix_up = min((bounds_of(g.left, r)[1] for r in range(t, s)), default=float("inf"))
            if min(bounds_of(g.right, s)[1], prefix_up) < 0:
                out |= vio(g.right, s)
                for r in range(t, s):
                    out |= vio(g.left, r)
        return frozenset(out)

    def sat(g: Formula, t: int) -> frozenset:
        if not bounds_of(g, t)[0] > 0:
            return empty
        if isinstance(g, Atom):
            return frozenset({(g.id, t)})
        if isinstance(g, FalseConst):
            return empty
        if isinstance(g, Not):
            return vio(g.arg, t)
        if isinstance(g, (And, Or)):
            return sat(g.left, t) | sat(g.right, t)
        lo, hi = grid_interval(g.interval, step)
        if isinstance(g, (Always, Eventually)):
            out = set()
            for s in range(t + lo, t + hi + 1):
                out |= sat(g.arg, s)
            return frozenset(out)
        out = set()
        for s in range(t + lo, t + hi + 1):
            prefix_lo = min((bounds_of(g.left, r)[0] for r in range(t, s)), default=float("inf"))
            if min(bounds_of(g.right, s)[0], prefix_lo) > 0:
                out |= sat(g.right, s)
                for r in range(t, s):
                    out |= sat(g.left, r)
        return frozenset(out)

    return vio, sat


def causation_from_epochs(
    view: PrefixView, f: Formula, bounds: Optional[DomainBounds] = None
) -> CausationVerdict:
    """Verdict at the prefix's last instant, read off the full epoch sets."""
    b = view.b_index
    vio, sat = _epochs(view, bounds)
    if any(t == b for _, t in vio(f, 0)):
        return CausationVerdict.VIOLATION
    if any(t == b for _, t in sat(f, 0)):
        return CausationVerdict.SATISFACTION
    return CausationVerdict.IRRELEVANT


# ---------------------------------------------------------------------------
# Streaming monitor
# ---------------------------------------------------------------------------


class EpochQuery:
    """Does an epoch of a table node contain an atom at the current instant?

    Only the membership of instant ``b`` matters for the causation verdict,
    so the full sets are never built. A node evaluated at ``t`` only reads
    atoms at instants in ``[t + lead, t + hor]``, which prunes the search.
    """

    def __init__(self, engine: Engine):
        self.engine = engine

    def verdict(self) -> CausationVerdict:
        eng = self.engine
        self.b = eng.b
        self.get = eng._reader(eng.b)
        self.memo: dict = {}
        root = eng.root
        if self.vio(root, 0):
            return CausationVerdict.VIOLATION
        if self.sat(root, 0):
            return CausationVerdict.SATISFACTION
        return CausationVerdict.IRRELEVANT

    def vio(self, n: _Node, t: int) -> bool:
        b = self.b
        if t + n.lead > b or b > t + n.hor:
            return False
        key = (id(n), t, 0)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        get = self.get
        out = False
        if get(n, t)[1] < 0:
            kind = n.kind
            if kind == "atom":
                out = t == b
            elif kind == "not":
                out = self.sat(n.kids[0], t)
            elif kind in ("and", "or"):
                out = self.vio(n.kids[0], t) or self.vio(n.kids[1], t)
            elif kind in ("alw", "ev"):
                c = n.kids[0]
                first = max(t + n.lo, b - c.hor)
                last = min(t + n.hi, b - c.lead)
                out = any(self.vio(c, s) for s in range(first, last + 1))
            elif kind == "until":
                out = self._until(n, t, 1)
        self.memo[key] = out
        return out

    def sat(self, n: _Node, t: int) -> bool:
        b = self.b
        if t + n.lead > b or b > t + n.hor:
            return False
        key = (id(n), t, 1)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        get = self.get
        out = False
        if get(n, t)[0] > 0:
            kind = n.kind
            if kind == "atom":
                out = t == b
            elif kind == "not":
                out = self.vio(n.kids[0], t)
            elif kind in ("and", "or"):
                out = self.sat(n.kids[0], t) or self.sat(n.kids[1], t)
            elif kind in ("alw", "ev"):
                c = n.kids[0]
                first = max(t + n.lo, b - c.hor)
                last = min(t + n.hi, b - c.lead)
                out = any(self.sat(c, s) for s in range(first, last + 1))
            elif kind == "until":
                out = self._until(n, t, 0)
        self.memo[key] = out
        return out

    def _until(self, n: _Node, t: int, upper: int) -> bool:
        """Search the until clause; ``upper`` selects U (violation) or L (satisfaction)."""
        left, right = n.kids
        get = self.get
        member = self.vio if upper else self.sat
        prefix = float("inf")
        for s in range(t, t + n.hi + 1):
            if s >= t + n.lo:
                cand = min(get(right, s)[upper], prefix)
                if (cand < 0) if upper else (cand > 0):
                    if member(right, s):
                        return True
                    if any(member(left, r) for r in range(t, s)):
                        return True
            if s < t + n.hi:
                x = get(left, s)[upper]
                if x < prefix:
                    prefix = x
        return False


class BooleanCausationMonitor:
    """Reports whether the newest sample is a cause of violation or satisfaction."""

    def __init__(
        self,
        formula: Formula,
        variables: Sequence[str],
        step: float = 1.0,
        bounds: Optional[DomainBounds] = None,
        kernel: str = NAIVE,
        engine: Optional[Engine] = None,
    ):
        self.engine = engine or Engine(formula, variables, step, bounds, kernel=kernel)
        self.query = EpochQuery(self.engine)

    @property
    def b_index(self) -> int:
        return self.engine.b

    def push(self, row: Sequence[float]) -> CausationVerdict:
        self.engine.step(row)
        return self.query.verdict()

    def step(self, view: PrefixView) -> CausationVerdict:
        expect_next(self.engine.b, view)
        return self.push(view.row(view.b_index))

    def run(self, trace: Trace) -> list[CausationVerdict]:
        return [self.step(trace.view(b)) for b in range(len(trace))]


def bcaum_step(state: BooleanCausationMonitor, view: PrefixView) -> CausationVerdict:
    return state.step(view)
