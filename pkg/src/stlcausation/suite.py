"""Deterministic random corpus of (formula, trace) pairs for cross-checks."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .engine import compile_expr
from .formula import Formula, atoms, format_formula, horizon_samples, parse_formula
from .trace import DomainBounds, Trace, atom_bounds

VARIABLES = ("x", "y")
SIGNAL_RANGE = 5.0
# domain box strictly wider than the signal range, so every generated atom's
# a-priori robustness range contains 0 in its interior
DOMAIN = DomainBounds({"x": (-6.0, 6.0), "y": (-6.0, 6.0)})
MAX_DEPTH = 4
MAX_WINDOW = 8
MAX_LENGTH = 64


@dataclass(frozen=True)
class Case:
    index: int
    text: str
    formula: Formula
    trace: Trace
    bounds: Optional[DomainBounds]

    @property
    def step(self) -> float:
        return self.trace.step


def _const(rng: random.Random, lo: float, hi: float) -> str:
    return f"{rng.uniform(lo, hi):.2f}"


def _atom_text(rng: random.Random) -> str:
    v = rng.choice(VARIABLES)
    kind = rng.randrange(5)
    if kind == 0:
        return f"{v} > {_const(rng, -4, 4)}"
    if kind == 1:
        return f"{v} < {_const(rng, -4, 4)}"
    if kind == 2:
        return f"x - y > {_const(rng, -4, 4)}"
    if kind == 3:
        return f"abs({v}) < {_const(rng, 0.5, 4)}"
    return f"0.5 * x + y < {_const(rng, -3, 3)}"


def _interval(rng: random.Random, step: float) -> str:
    lo = rng.randint(0, MAX_WINDOW // 2)
    hi = rng.randint(lo, MAX_WINDOW)
    return f"[{lo * step:g},{hi * step:g}]"


def _formula_text(rng: random.Random, depth: int, step: float, root: Optional[str] = None) -> str:
    if depth <= 1 or (root is None and rng.random() < 0.2):
        return f"({_atom_text(rng)})"
    op = root or rng.choice(["not", "and", "or", "->", "alw", "ev", "until", "until"])
    sub = lambda: _formula_text(rng, depth - 1, step)  # noqa: E731
    if op == "not":
        return f"(not {sub()})"
    if op in ("and", "or", "->"):
        return f"({sub()} {op} {sub()})"
    if op in ("alw", "ev"):
        return f"({op}_{_interval(rng, step)} {sub()})"
    return f"({sub()} until_{_interval(rng, step)} {sub()})"


def _trace(rng: random.Random, f: Formula, length: int, step: float) -> Trace:
    trace = Trace(VARIABLES, step=step)
    cols = []
    for _ in VARIABLES:
        knots = {0: rng.uniform(-SIGNAL_RANGE, SIGNAL_RANGE)}
        k = 0
        while k < length - 1:
            k = min(length - 1, k + rng.randint(1, 6))
            knots[k] = rng.uniform(-SIGNAL_RANGE, SIGNAL_RANGE)
        keys = sorted(knots)
        col = []
        for a, z in zip(keys, keys[1:]):
            for i in range(a, z):
                w = (i - a) / (z - a)
                col.append(knots[a] * (1 - w) + knots[z] * w)
        col.append(knots[keys[-1]])
        cols.append(col[:length])
    fns = [compile_expr(a.expr, VARIABLES) for a in atoms(f)]
    for i in range(length):
        row = [c[i] for c in cols]
        # nudge samples off any atom's zero set
        while any(fn(row) == 0.0 for fn in fns):
            row = [v + rng.uniform(-1e-3, 1e-3) for v in row]
        trace.append(row)
    return trace


def gen_case(seed: int, index: int) -> Case:
    rng = random.Random(f"{seed}:{index}")
    step = 1.0 if rng.random() < 0.8 else 0.5
    root = "until" if index % 10 == 0 else None
    depth = rng.randint(2, MAX_DEPTH)
    text = _formula_text(rng, depth, step, root)
    f = parse_formula(text, VARIABLES)
    hor = horizon_samples(f, step)
    length = min(MAX_LENGTH, hor + 1 + rng.randint(0, 8))
    trace = _trace(rng, f, length, step)
    bounds = DOMAIN if rng.random() < 0.5 else None
    if bounds is not None:
        for a in atoms(f):
            lo, hi = atom_bounds(a, bounds)
            assert lo < 0 < hi, (text, a)
    return Case(index, text, f, trace, bounds)


def gen_suite(seed: int, count: int) -> list[Case]:
    """``count`` reproducible cases; every tenth is rooted at an until."""
    if count <= 0:
        raise ValueError("count must be positive")
    return [gen_case(seed, i) for i in range(count)]


def describe(case: Case) -> str:
    return f"case {case.index}: {format_formula(case.formula)} on {len(case.trace)} samples"
