"""Incremental per-instant tables for the streaming monitors.

Every subformula node keeps, for each grid instant ``t`` it may be asked
about, the interval ``[L, U]`` of reachable robustness given the samples seen
so far and, in causation mode, the violation/satisfaction causation
distances ``V``/``S``.

For a node with horizon ``hor`` and lead ``lead`` (the smallest offset at
which it reads an atom), the entry at ``t`` at step ``b`` is

* a constant "pre" value while ``b < t + lead`` (no atom observed yet),
* recomputed every step while ``t + lead <= b <= t + hor + 1``,
* final afterwards.

Only instants inside a node's relevant range are ever materialized: the
root is asked about ``t = 0`` only, and temporal operators widen the range
of their children by their window.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from typing import Optional, Sequence

from .formula import (
    Abs,
    Add,
    Always,
    And,
    Atom,
    Const,
    Eventually,
    Expr,
    FalseConst,
    Formula,
    Mul,
    Neg,
    Not,
    Or,
    Sub,
    Until,
    Var,
    grid_interval,
)
from .trace import DomainBounds, atom_bounds

INF = math.inf

# tables are trimmed to their keep window once every 256 steps
TRIM_EVERY_MASK = 255
NAIVE = "naive"
DEQUE = "deque"
KERNELS = (NAIVE, DEQUE)


class SteppingError(RuntimeError):
    """A monitor was fed a prefix that does not extend the previous one by one sample."""


def compile_expr(expr: Expr, variables: Sequence[str]):
    """Turn ``expr`` into a function of a sample row.

    The generated code performs the same floating-point operations in the
    same order as :func:`formula.eval_expr`.
    """
    index = {name: i for i, name in enumerate(variables)}
    consts: list[float] = []

    def src(e: Expr) -> str:
        if isinstance(e, Const):
            consts.append(e.value)
            return f"c[{len(consts) - 1}]"
        if isinstance(e, Var):
            if e.name not in index:
                raise KeyError(f"variable {e.name!r} is not in the trace")
            return f"r[{index[e.name]}]"
        if isinstance(e, Neg):
            return f"(-{src(e.arg)})"
        if isinstance(e, Abs):
            return f"abs({src(e.arg)})"
        op = {Add: "+", Sub: "-", Mul: "*"}[type(e)]
        return f"({src(e.left)} {op} {src(e.right)})"

    body = src(expr)
    return eval(f"lambda r, c=c: {body}", {"abs": abs}, {"c": consts})


class _Node:
    __slots__ = (
        "kind", "kids", "lo", "hi", "hor", "lead", "rlo", "rhi", "keep",
        "pl", "pu", "pv", "ps", "L", "U", "V", "S", "base",
        "fn", "rmin", "rmax", "atom_id", "dq",
    )

    def __init__(self, kind: str):
        self.kind = kind
        self.kids: tuple = ()
        self.lo = self.hi = 0
        self.hor = 0
        self.lead = 0
        self.rlo, self.rhi = 0, -1
        self.keep = 1
        self.pl = self.pu = self.pv = self.ps = 0.0
        self.L: list = []
        self.U: list = []
        self.V: list = []
        self.S: list = []
        self.base = 0
        self.fn = None
        self.rmin = -INF
        self.rmax = INF
        self.atom_id = -1
        self.dq = None

    def __repr__(self):
        return f"_Node({self.kind}, R=[{self.rlo},{self.rhi}], hor={self.hor}, lead={self.lead})"


class _MonoDeque:
    """Sliding minimum (or maximum) over frozen instants.

    Values are strictly monotone from head to tail, so the extremum over
    ``[x, newest]`` is the first stored element at or after ``x``.
    """

    __slots__ = ("ts", "vs", "head", "is_min")

    def __init__(self, is_min: bool):
        self.ts: list = []
        self.vs: list = []
        self.head = 0
        self.is_min = is_min

    def push(self, t: int, v: float) -> None:
        ts, vs = self.ts, self.vs
        head = self.head
        if self.is_min:
            while len(vs) > head and vs[-1] >= v:
                vs.pop()
                ts.pop()
        else:
            while len(vs) > head and vs[-1] <= v:
                vs.pop()
                ts.pop()
        ts.append(t)
        vs.append(v)

    def query(self, x: int) -> float:
        ts = self.ts
        head = self.head
        if head < len(ts) and x <= ts[head]:
            return self.vs[head]
        i = bisect_left(ts, x, head)
        if i == len(ts):
            return INF if self.is_min else -INF
        return self.vs[i]

    def evict_before(self, x: int) -> None:
        ts = self.ts
        head = self.head
        n = len(ts)
        while head < n and ts[head] < x:
            head += 1
        if head > 256 and head * 2 > n:
            del self.ts[:head]
            del self.vs[:head]
            head = 0
        self.head = head


class _Running:
    """Drop-in for :class:`_MonoDeque` when the window start never moves.

    A node asked about a single instant sees every frozen child instant in
    its window, so a running extremum answers every query.
    """

    __slots__ = ("acc", "is_min")

    def __init__(self, is_min: bool):
        self.is_min = is_min
        self.acc = INF if is_min else -INF

    def push(self, t: int, v: float) -> None:
        if (v < self.acc) if self.is_min else (v > self.acc):
            self.acc = v

    def query(self, x: int) -> float:
        return self.acc

    def evict_before(self, x: int) -> None:
        pass


class Engine:
    """Step-by-step evaluation of a formula's interval table.

    ``causation=True`` additionally maintains the causation distances.
    """

    def __init__(
        self,
        formula: Formula,
        variables: Sequence[str],
        step: float = 1.0,
        bounds: Optional[DomainBounds] = None,
        causation: bool = False,
        kernel: str = NAIVE,
        deque_min_width: int = 16,
    ):
        if kernel not in KERNELS:
            raise ValueError(f"unknown kernel {kernel!r}")
        self.formula = formula
        self.variables = tuple(variables)
        self.step_size = step
        self.bounds = bounds
        self.causation = causation
        self.kernel = kernel
        # windows narrower than this are cheaper to rescan than to track
        self.deque_min_width = deque_min_width
        self.nodes: list[_Node] = []
        self.root = self._build(formula)
        self._ranges(self.root, 0, 0)
        # the root's single entry at t = 0 is the monitor output; never trim it
        self.root.keep = 1 << 62
        for n in self.nodes:
            self._prepare(n)
        self._steps = self._plan()
        self.restart()

    def restart(self) -> None:
        """Forget every sample and start over at index 0, keeping the compiled tables."""
        for n in self.nodes:
            n.base = n.rlo
            n.L, n.U, n.V, n.S = [], [], [], []
            if n.dq is not None:
                kind = type(n.dq[0])
                is_min = n.dq[0].is_min
                n.dq = (kind(is_min), kind(is_min), kind(True), kind(False))
        self.row: Sequence[float] = ()
        self.b = -1

    # -- compilation -------------------------------------------------------

    def _build(self, f: Formula) -> _Node:
        if isinstance(f, Atom):
            n = _Node("atom")
            n.fn = compile_expr(f.expr, self.variables)
            lo, hi = atom_bounds(f, self.bounds)
            n.rmin = max(lo, f.r_min)
            n.rmax = min(hi, f.r_max)
            n.atom_id = f.id
        elif isinstance(f, FalseConst):
            n = _Node("false")
        elif isinstance(f, Not):
            n = _Node("not")
            n.kids = (self._build(f.arg),)
        elif isinstance(f, (And, Or)):
            n = _Node("and" if isinstance(f, And) else "or")
            n.kids = (self._build(f.left), self._build(f.right))
        else:
            n = _Node({Always: "alw", Eventually: "ev", Until: "until"}[type(f)])
            n.lo, n.hi = grid_interval(f.interval, self.step_size)
            if isinstance(f, Until):
                n.kids = (self._build(f.left), self._build(f.right))
            else:
                n.kids = (self._build(f.arg),)
        self._shape(n)
        self.nodes.append(n)  # post-order: children first
        return n

    @staticmethod
    def _shape(n: _Node) -> None:
        k = n.kids
        if n.kind == "atom":
            n.hor, n.lead = 0, 0
        elif n.kind == "false":
            n.hor, n.lead = 0, 0
        elif n.kind == "not":
            n.hor, n.lead = k[0].hor, k[0].lead
        elif n.kind in ("and", "or"):
            n.hor = max(k[0].hor, k[1].hor)
            n.lead = min(k[0].lead, k[1].lead)
        elif n.kind in ("alw", "ev"):
            n.hor = n.hi + k[0].hor
            n.lead = n.lo + k[0].lead
        else:
            n.hor = n.hi + max(k[0].hor, k[1].hor)
            lead = n.lo + k[1].lead
            if n.hi >= 1:
                lead = min(lead, k[0].lead)
            n.lead = lead

    def _ranges(self, n: _Node, rlo: int, rhi: int) -> None:
        n.rlo, n.rhi = rlo, rhi
        if n.kind in ("not", "and", "or"):
            for c in n.kids:
                c.keep = n.hor + 2
                self._ranges(c, rlo, rhi)
        elif n.kind in ("alw", "ev"):
            c = n.kids[0]
            c.keep = (c.hor + 2) if self._uses_deque(n) else (n.hor + 2)
            self._ranges(c, rlo + n.lo, rhi + n.hi)
        elif n.kind == "until":
            left, right = n.kids
            left.keep = right.keep = n.hor + 2
            if n.hi >= 1:
                self._ranges(left, rlo, rhi + n.hi - 1)
            else:
                self._ranges(left, 0, -1)
            self._ranges(right, rlo + n.lo, rhi + n.hi)

    def _uses_deque(self, n: _Node) -> bool:
        return (
            self.kernel == DEQUE
            and n.kind in ("alw", "ev")
            and n.hi - n.lo + 1 >= self.deque_min_width
        )

    def _prepare(self, n: _Node) -> None:
        if n.kind == "atom":
            n.pl, n.pu, n.pv, n.ps = n.rmin, n.rmax, n.rmax, n.rmin
        elif n.kind == "false":
            # no atom can make the current instant a cause
            n.pl, n.pu, n.pv, n.ps = -INF, -INF, INF, -INF
        else:
            n.pl, n.pu, n.pv, n.ps = _evaluate(n, 0, lambda c, s: (c.pl, c.pu, c.pv, c.ps))
        if self._uses_deque(n):
            is_min = n.kind == "alw"
            # L, U deques follow the operator; V is always a min, S a max
            kind = _Running if n.rlo == n.rhi else _MonoDeque
            n.dq = (kind(is_min), kind(is_min), kind(True), kind(False))

    # -- stepping ----------------------------------------------------------

    def _plan(self) -> list:
        plan = []
        for n in self.nodes:
            if n.kind == "atom":
                fn = self._atom
            elif n.kind == "not":
                fn = self._not
            elif n.kind in ("and", "or"):
                fn = self._binary
            elif n.kind == "until":
                fn = self._until
            elif n.kind == "false":
                fn = self._const
            elif n.dq is not None:
                fn = self._window_deque
            else:
                fn = self._window
            plan.append((n, fn, n.kind == "atom", n.dq is not None))
        return plan

    def step(self, row: Sequence[float]) -> None:
        b = self.b + 1
        self.b = b
        self.row = row
        cz = self.causation
        for n, fn, is_atom, has_dq in self._steps:
            if is_atom:
                fn(n, b, 0, 0, cz)
                continue
            hi_t = b - n.lead
            if hi_t > n.rhi:
                hi_t = n.rhi
            lo_t = b - n.hor - 1 if cz else b - n.hor
            if lo_t < n.rlo:
                lo_t = n.rlo
            if has_dq:
                self._feed_deques(n, b)
            if hi_t < lo_t:
                continue
            if hi_t == b - n.lead and hi_t - n.base == len(n.L):
                n.L.append(0.0)
                n.U.append(0.0)
                if cz:
                    n.V.append(0.0)
                    n.S.append(0.0)
            fn(n, b, lo_t, hi_t, cz)
        if not b & TRIM_EVERY_MASK:
            for n in self.nodes:
                self._trim(n, b)

    def _trim(self, n: _Node, b: int) -> None:
        drop = (b - n.keep) - n.base
        if drop > 0:
            del n.L[:drop]
            del n.U[:drop]
            if n.V:
                del n.V[:drop]
                del n.S[:drop]
            n.base += drop

    def _atom(self, n: _Node, b: int, lo_t: int, hi_t: int, cz: bool) -> None:
        if n.rlo <= b <= n.rhi:
            v = n.fn(self.row)
            n.L.append(v)
            n.U.append(v)
            if cz:
                n.V.append(v)
                n.S.append(v)
        if cz and n.rlo <= b - 1 <= n.rhi:
            i = b - 1 - n.base
            n.V[i] = n.rmax
            n.S[i] = n.rmin

    def _const(self, n: _Node, b: int, lo_t: int, hi_t: int, cz: bool) -> None:
        for t in range(lo_t, hi_t + 1):
            i = t - n.base
            n.L[i] = n.pl
            n.U[i] = n.pu
            if cz:
                n.V[i] = n.pv
                n.S[i] = n.ps

    def _not(self, n: _Node, b: int, lo_t: int, hi_t: int, cz: bool) -> None:
        c = n.kids[0]
        off = c.base - n.base
        cL, cU = c.L, c.U
        L, U = n.L, n.U
        for i in range(lo_t - n.base, hi_t - n.base + 1):
            j = i - off
            L[i] = -cU[j]
            U[i] = -cL[j]
        if cz:
            cV, cS = c.V, c.S
            V, S = n.V, n.S
            for i in range(lo_t - n.base, hi_t - n.base + 1):
                j = i - off
                V[i] = -cS[j]
                S[i] = -cV[j]

    def _binary(self, n: _Node, b: int, lo_t: int, hi_t: int, cz: bool) -> None:
        c1, c2 = n.kids
        k1, k2 = b - c1.lead, b - c2.lead
        is_and = n.kind == "and"
        L, U, V, S = n.L, n.U, n.V, n.S
        L1, U1, V1, S1 = c1.L, c1.U, c1.V, c1.S
        L2, U2, V2, S2 = c2.L, c2.U, c2.V, c2.S
        nb, b1, b2 = n.base, c1.base, c2.base
        for t in range(lo_t, hi_t + 1):
            i = t - nb
            if t <= k1:
                j = t - b1
                l1 = L1[j]
                u1 = U1[j]
                if cz:
                    v1 = V1[j]
                    s1 = S1[j]
            else:
                l1, u1, v1, s1 = c1.pl, c1.pu, c1.pv, c1.ps
            if t <= k2:
                j = t - b2
                l2 = L2[j]
                u2 = U2[j]
                if cz:
                    v2 = V2[j]
                    s2 = S2[j]
            else:
                l2, u2, v2, s2 = c2.pl, c2.pu, c2.pv, c2.ps
            if is_and:
                L[i] = l1 if l1 < l2 else l2
                U[i] = u1 if u1 < u2 else u2
                if cz:
                    V[i] = v1 if v1 < v2 else v2
                    x = s1 if s1 < l2 else l2
                    y = l1 if l1 < s2 else s2
                    S[i] = x if x > y else y
            else:
                L[i] = l1 if l1 > l2 else l2
                U[i] = u1 if u1 > u2 else u2
                if cz:
                    x = v1 if v1 > u2 else u2
                    y = u1 if u1 > v2 else v2
                    V[i] = x if x < y else y
                    S[i] = s1 if s1 > s2 else s2

    def _window(self, n: _Node, b: int, lo_t: int, hi_t: int, cz: bool) -> None:
        c = n.kids[0]
        known = b - c.lead
        cb = c.base
        lo, hi = n.lo, n.hi
        is_alw = n.kind == "alw"
        agg = min if is_alw else max
        cL, cU, cV, cS = c.L, c.U, c.V, c.S
        L, U, V, S = n.L, n.U, n.V, n.S
        nb = n.base
        for t in range(lo_t, hi_t + 1):
            i = t - nb
            x = t + lo - cb
            z = t + hi
            if z <= known:
                y = z - cb + 1
                l = agg(cL[x:y])
                u = agg(cU[x:y])
                if cz:
                    v = min(cV[x:y])
                    s = max(cS[x:y])
            elif x + cb <= known:
                y = known - cb + 1
                l = agg(agg(cL[x:y]), c.pl)
                u = agg(agg(cU[x:y]), c.pu)
                if cz:
                    v = min(min(cV[x:y]), c.pv)
                    s = max(max(cS[x:y]), c.ps)
            else:
                l, u, v, s = c.pl, c.pu, c.pv, c.ps
            L[i] = l
            U[i] = u
            if cz:
                if is_alw:
                    V[i] = v
                    S[i] = s if s < l else l
                else:
                    V[i] = v if v > u else u
                    S[i] = s

    def _feed_deques(self, n: _Node, b: int) -> None:
        c = n.kids[0]
        frozen = b - c.hor - 1
        dL, dU, dV, dS = n.dq
        if c.rlo <= frozen <= c.rhi:
            j = frozen - c.base
            dL.push(frozen, c.L[j])
            dU.push(frozen, c.U[j])
            if self.causation:
                dV.push(frozen, c.V[j])
                dS.push(frozen, c.S[j])
        oldest = b - n.hor - 1 + n.lo
        dL.evict_before(oldest)
        dU.evict_before(oldest)
        if self.causation:
            dV.evict_before(oldest)
            dS.evict_before(oldest)

    def _window_deque(self, n: _Node, b: int, lo_t: int, hi_t: int, cz: bool) -> None:
        c = n.kids[0]
        known = b - c.lead
        frozen = b - c.hor - 1
        cb = c.base
        lo, hi = n.lo, n.hi
        is_alw = n.kind == "alw"
        agg = min if is_alw else max
        dL, dU, dV, dS = n.dq
        cL, cU, cV, cS = c.L, c.U, c.V, c.S
        ident = INF if is_alw else -INF
        for t in range(lo_t, hi_t + 1):
            a = t + lo
            z = t + hi
            if a <= frozen:
                l = dL.query(a)
                u = dU.query(a)
                if cz:
                    v = dV.query(a)
                    s = dS.query(a)
                a = frozen + 1
            else:
                l = u = ident
                v, s = INF, -INF
            top = z if z <= known else known
            if a <= top:
                x, y = a - cb, top - cb + 1
                l = agg(l, agg(cL[x:y]))
                u = agg(u, agg(cU[x:y]))
                if cz:
                    v = min(v, min(cV[x:y]))
                    s = max(s, max(cS[x:y]))
            if z > known:
                l = agg(l, c.pl)
                u = agg(u, c.pu)
                if cz:
                    v = min(v, c.pv)
                    s = max(s, c.ps)
            i = t - n.base
            n.L[i] = l
            n.U[i] = u
            if cz:
                if is_alw:
                    n.V[i] = v
                    n.S[i] = min(s, l)
                else:
                    n.V[i] = max(v, u)
                    n.S[i] = s

    def _until(self, n: _Node, b: int, lo_t: int, hi_t: int, cz: bool) -> None:
        get = self._reader(b)
        for t in range(lo_t, hi_t + 1):
            l, u, v, s = _evaluate(n, t, get, cz)
            i = t - n.base
            n.L[i] = l
            n.U[i] = u
            if cz:
                n.V[i] = v
                n.S[i] = s

    def _reader(self, b: int):
        cz = self.causation

        def get(c: _Node, s: int):
            if s > b - c.lead:
                return c.pl, c.pu, c.pv, c.ps
            j = s - c.base
            if cz:
                return c.L[j], c.U[j], c.V[j], c.S[j]
            return c.L[j], c.U[j], INF, -INF

        return get

    # -- queries -----------------------------------------------------------

    def value(self, n: _Node, t: int) -> tuple:
        """``(L, U, V, S)`` of node ``n`` at instant ``t`` for the current step."""
        return self._reader(self.b)(n, t)

    def interval(self) -> tuple:
        l, u, _, _ = self.value(self.root, 0)
        return l, u

    def distances(self) -> tuple:
        if not self.causation:
            raise RuntimeError("engine was built without causation distances")
        _, _, v, s = self.value(self.root, 0)
        return v, s


def _evaluate(n: _Node, t: int, get, cz: bool = True) -> tuple:
    """One table entry of ``n`` at ``t`` from its children's entries.

    Used for every operator when computing the constant "pre" values and for
    until entries during stepping.
    """
    kind = n.kind
    if kind == "not":
        l, u, v, s = get(n.kids[0], t)
        return -u, -l, -s, -v
    if kind in ("and", "or"):
        l1, u1, v1, s1 = get(n.kids[0], t)
        l2, u2, v2, s2 = get(n.kids[1], t)
        if kind == "and":
            return min(l1, l2), min(u1, u2), min(v1, v2), max(min(s1, l2), min(l1, s2))
        return max(l1, l2), max(u1, u2), min(max(v1, u2), max(u1, v2)), max(s1, s2)
    if kind in ("alw", "ev"):
        c = n.kids[0]
        vals = [get(c, s) for s in range(t + n.lo, t + n.hi + 1)]
        v = min(x[2] for x in vals)
        s = max(x[3] for x in vals)
        if kind == "alw":
            l = min(x[0] for x in vals)
            u = min(x[1] for x in vals)
            return l, u, v, min(s, l)
        l = max(x[0] for x in vals)
        u = max(x[1] for x in vals)
        return l, u, max(v, u), s
    if kind == "until":
        c1, c2 = n.kids
        lo, hi = n.lo, n.hi
        iL1 = iU1 = iV1 = INF
        sS1 = -INF
        bL = bU = bS = -INF
        bV = INF
        for s in range(t, t + hi + 1):
            if s >= t + lo:
                l2, u2, v2, s2 = get(c2, s)
                x = min(l2, iL1)
                if x > bL:
                    bL = x
                x = min(u2, iU1)
                if x > bU:
                    bU = x
                if cz:
                    x = min(iV1, v2)
                    if x < bV:
                        bV = x
                    x = max(min(sS1, iL1, l2), min(iL1, s2))
                    if x > bS:
                        bS = x
            if s < t + hi:
                l1, u1, v1, s1 = get(c1, s)
                if l1 < iL1:
                    iL1 = l1
                if u1 < iU1:
                    iU1 = u1
                if cz:
                    if v1 < iV1:
                        iV1 = v1
                    if s1 > sS1:
                        sS1 = s1
        return bL, bU, max(bV, bU), bS
    raise AssertionError(f"no table rule for {kind}")
