"""STL abstract syntax, a text grammar with a recursive-descent parser, and
structural helpers (horizon, atom inventory, printing, grid snapping).

Grammar, loosest binding first::

    formula := implies
    implies := or ("->" implies)?
    or      := and ("or" and)*
    and     := until ("and" until)*
    until   := unary ("until_[l,u]" unary)*
    unary   := "not" unary | "alw_[l,u]" unary | "ev_[l,u]" unary | primary
    primary := "true" | "false" | atom | "(" formula ")"
    atom    := expr ("<" | ">") expr
    expr    := term (("+" | "-") term)*
    term    := factor ("*" factor)*
    factor  := "-" factor | number | name | "abs" "(" expr ")" | "(" expr ")"

Every atom is canonicalized to ``f > 0``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Union


# ---------------------------------------------------------------------------
# Arithmetic expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Abs:
    arg: "Expr"


Expr = Union[Const, Var, Neg, Add, Sub, Mul, Abs]


def eval_expr(expr: Expr, env) -> float:
    """Evaluate ``expr`` with variable values looked up in ``env[name]``."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, Neg):
        return -eval_expr(expr.arg, env)
    if isinstance(expr, Add):
        return eval_expr(expr.left, env) + eval_expr(expr.right, env)
    if isinstance(expr, Sub):
        return eval_expr(expr.left, env) - eval_expr(expr.right, env)
    if isinstance(expr, Mul):
        return eval_expr(expr.left, env) * eval_expr(expr.right, env)
    if isinstance(expr, Abs):
        return abs(eval_expr(expr.arg, env))
    raise TypeError(f"not an expression: {expr!r}")


def expr_variables(expr: Expr) -> set[str]:
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, (Neg, Abs)):
        return expr_variables(expr.arg)
    return expr_variables(expr.left) | expr_variables(expr.right)


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Const):
        return repr(float(expr.value))
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return f"-({format_expr(expr.arg)})"
    if isinstance(expr, Abs):
        return f"abs({format_expr(expr.arg)})"
    op = {Add: "+", Sub: "-", Mul: "*"}[type(expr)]
    return f"({format_expr(expr.left)} {op} {format_expr(expr.right)})"


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

Interval = tuple  # (lower, upper) in time units, or in samples once snapped


@dataclass(frozen=True)
class Atom:
    """Atomic proposition ``expr > 0``.

    ``r_min``/``r_max`` are the a-priori robustness bounds used for instants
    that have not been observed yet.
    """

    id: int
    expr: Expr
    r_min: float = -math.inf
    r_max: float = math.inf


@dataclass(frozen=True)
class FalseConst:
    pass


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Always:
    interval: Interval
    arg: "Formula"


@dataclass(frozen=True)
class Eventually:
    interval: Interval
    arg: "Formula"


@dataclass(frozen=True)
class Until:
    interval: Interval
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, FalseConst, Not, And, Or, Always, Eventually, Until]

TRUE = Not(FalseConst())
FALSE = FalseConst()


def children(f: Formula) -> tuple:
    if isinstance(f, (Atom, FalseConst)):
        return ()
    if isinstance(f, (Not, Always, Eventually)):
        return (f.arg,)
    return (f.left, f.right)


def horizon(f: Formula) -> float:
    """Future extent (time units) needed past the anchor instant."""
    if isinstance(f, (Atom, FalseConst)):
        return 0
    if isinstance(f, Not):
        return horizon(f.arg)
    if isinstance(f, (And, Or)):
        return max(horizon(f.left), horizon(f.right))
    if isinstance(f, (Always, Eventually)):
        return f.interval[1] + horizon(f.arg)
    if isinstance(f, Until):
        return f.interval[1] + max(horizon(f.left), horizon(f.right))
    raise TypeError(f"not a formula: {f!r}")


def iter_nodes(f: Formula) -> Iterator[Formula]:
    """Pre-order, left to right."""
    yield f
    for c in children(f):
        yield from iter_nodes(c)


def atoms(f: Formula) -> list[Atom]:
    """Atoms in id order; each syntactic occurrence appears once."""
    return sorted((n for n in iter_nodes(f) if isinstance(n, Atom)), key=lambda a: a.id)


def variables(f: Formula) -> set[str]:
    names: set[str] = set()
    for a in atoms(f):
        names |= expr_variables(a.expr)
    return names


def map_atoms(f: Formula, fn) -> Formula:
    """Rebuild ``f`` with every atom replaced by ``fn(atom)``."""
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, FalseConst):
        return f
    if isinstance(f, Not):
        return Not(map_atoms(f.arg, fn))
    if isinstance(f, (And, Or)):
        return type(f)(map_atoms(f.left, fn), map_atoms(f.right, fn))
    if isinstance(f, (Always, Eventually)):
        return type(f)(f.interval, map_atoms(f.arg, fn))
    return Until(f.interval, map_atoms(f.left, fn), map_atoms(f.right, fn))


def renumber(f: Formula) -> Formula:
    """Give atoms dense ids 0, 1, ... in left-to-right order."""
    counter = iter(range(1 << 30))
    return map_atoms(f, lambda a: replace(a, id=next(counter)))


def format_formula(f: Formula) -> str:
    """Fully parenthesized text accepted back by :func:`parse_formula`."""
    if isinstance(f, Atom):
        text = format_expr(f.expr)
        if isinstance(f.expr, Abs):
            text = f"({text})"
        return f"({text} > 0)"
    if isinstance(f, FalseConst):
        return "false"
    if isinstance(f, Not):
        return f"(not {format_formula(f.arg)})"
    if isinstance(f, And):
        return f"({format_formula(f.left)} and {format_formula(f.right)})"
    if isinstance(f, Or):
        return f"({format_formula(f.left)} or {format_formula(f.right)})"
    if isinstance(f, (Always, Eventually)):
        op = "alw" if isinstance(f, Always) else "ev"
        lo, hi = f.interval
        return f"({op}_[{_num(lo)},{_num(hi)}] {format_formula(f.arg)})"
    lo, hi = f.interval
    return f"({format_formula(f.left)} until_[{_num(lo)},{_num(hi)}] {format_formula(f.right)})"


def _num(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# Grid snapping
# ---------------------------------------------------------------------------

GRID_TOL = 1e-9


def grid_interval(interval: Interval, step: float) -> tuple[int, int]:
    """Snap ``[l, u]`` to sample offsets, rounding ``l`` up and ``u`` down."""
    lo, hi = interval
    a = math.ceil(lo / step - GRID_TOL)
    b = math.floor(hi / step + GRID_TOL)
    if a > b:
        raise IntervalError(f"interval [{lo}, {hi}] contains no grid point for step {step}")
    return a, b


def horizon_samples(f: Formula, step: float) -> int:
    if isinstance(f, (Atom, FalseConst)):
        return 0
    if isinstance(f, Not):
        return horizon_samples(f.arg, step)
    if isinstance(f, (And, Or)):
        return max(horizon_samples(f.left, step), horizon_samples(f.right, step))
    hi = grid_interval(f.interval, step)[1]
    if isinstance(f, (Always, Eventually)):
        return hi + horizon_samples(f.arg, step)
    return hi + max(horizon_samples(f.left, step), horizon_samples(f.right, step))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class FormulaError(ValueError):
    """Base class for formula construction errors."""


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnknownVariableError(FormulaError):
    def __init__(self, name: str, line: int, column: int):
        super().__init__(f"unknown variable {name!r} at line {line}, column {column}")
        self.name = name
        self.line = line
        self.column = column


class IntervalError(FormulaError):
    pass


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|[()\[\],<>+\-*])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"not", "and", "or", "true", "false", "abs", "alw_", "ev_", "until_"}


class _Parser:
    def __init__(self, text: str, known: Optional[set[str]]):
        self.text = text
        self.known = known
        self.tokens = self._tokenize(text)
        self.i = 0
        self.next_atom = 0
        # furthest failure seen, for error reporting after backtracking
        self.err: Optional[tuple[int, str]] = None

    def _tokenize(self, text: str) -> list[_Token]:
        out = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                line, col = _line_col(text, pos)
                raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, col)
            kind = m.lastgroup
            if kind != "ws":
                tok_text = m.group()
                if kind == "op" or (kind == "name" and tok_text in _KEYWORDS):
                    kind = tok_text
                out.append(_Token(kind, tok_text, pos))
            pos = m.end()
        out.append(_Token("eof", "", len(text)))
        return out

    # -- helpers -----------------------------------------------------------

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def fail(self, message: str, tok: Optional[_Token] = None):
        tok = tok or self.tok
        if self.err is None or tok.pos >= self.err[0]:
            self.err = (tok.pos, message)
        raise _Backtrack()

    def expect(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            self.fail(f"expected {kind!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, kind: str) -> bool:
        if self.tok.kind == kind:
            self.i += 1
            return True
        return False

    # -- entry -------------------------------------------------------------

    def parse(self) -> Formula:
        try:
            f = self.implies()
            if self.tok.kind != "eof":
                self.fail(f"unexpected {self.tok.text!r}")
        except _Backtrack:
            pos, message = self.err
            line, col = _line_col(self.text, pos)
            raise FormulaSyntaxError(message, line, col) from None
        return f

    # -- formulas ----------------------------------------------------------

    def implies(self) -> Formula:
        left = self.disj()
        if self.accept("->"):
            right = self.implies()
            return Or(Not(left), right)
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.accept("or"):
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.until()
        while self.accept("and"):
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        f = self.unary()
        while self.tok.kind == "until_":
            self.i += 1
            interval = self.interval()
            f = Until(interval, f, self.unary())
        return f

    def unary(self) -> Formula:
        kind = self.tok.kind
        if kind == "not":
            self.i += 1
            return Not(self.unary())
        if kind in ("alw_", "ev_"):
            self.i += 1
            interval = self.interval()
            arg = self.unary()
            return Always(interval, arg) if kind == "alw_" else Eventually(interval, arg)
        return self.primary()

    def primary(self) -> Formula:
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if self.tok.kind == "(":
            start, atom_id = self.i, self.next_atom
            try:
                return self.atom()
            except _Backtrack:
                self.i, self.next_atom = start, atom_id
            self.expect("(")
            f = self.implies()
            self.expect(")")
            return f
        return self.atom()

    def interval(self) -> Interval:
        start = self.expect("[")
        lo = self.bound()
        self.expect(",")
        hi = self.bound()
        self.expect("]")
        line, col = _line_col(self.text, start.pos)
        if lo > hi:
            raise IntervalError(f"reversed interval [{lo}, {hi}] at line {line}, column {col}")
        return (lo, hi)

    def bound(self) -> float:
        tok = self.tok
        if tok.kind == "name" and tok.text.lower() in ("inf", "infinity"):
            line, col = _line_col(self.text, tok.pos)
            raise IntervalError(f"unbounded interval at line {line}, column {col}")
        if tok.kind == "-":
            line, col = _line_col(self.text, tok.pos)
            raise IntervalError(f"negative interval bound at line {line}, column {col}")
        return float(self.expect("number").text)

    # -- atoms -------------------------------------------------------------

    def atom(self) -> Formula:
        lhs, lbare = self.side()
        if self.tok.kind not in ("<", ">"):
            self.fail("expected comparison '<' or '>'")
        cmp = self.tok.kind
        self.i += 1
        rhs, rbare = self.side()
        if cmp == "<":
            # rewrite as rhs > lhs
            lhs, rhs, lbare, rbare = rhs, lhs, rbare, lbare
        return self.canonical_gt(lhs, rhs, lbare, rbare)

    def side(self) -> tuple:
        """An expression, and whether it is a bare ``abs(...)`` call."""
        starts_abs = self.tok.kind == "abs"
        e = self.expr()
        return e, starts_abs and isinstance(e, Abs)

    def canonical_gt(self, big: Expr, small: Expr, big_abs: bool, small_abs: bool) -> Formula:
        """Canonicalize ``big > small`` into atoms of shape ``f > 0``.

        Only a bare ``abs(...)`` side is split; ``(abs(...))`` stays one atom.
        """
        if small_abs:
            # c > |e|  <=>  (c - e > 0) and (c + e > 0)
            e = small.arg
            first = self.make_atom(Sub(big, e))
            return And(first, self.make_atom(Add(big, e)))
        if big_abs:
            # |e| > c  <=>  (e - c > 0) or (-e - c > 0)
            e = big.arg
            first = self.make_atom(_minus(e, small))
            return Or(first, self.make_atom(_minus(Neg(e), small)))
        return self.make_atom(_minus(big, small))

    def make_atom(self, expr: Expr) -> Atom:
        atom = Atom(self.next_atom, expr)
        self.next_atom += 1
        return atom

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.tok.kind
            self.i += 1
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.accept("*"):
            e = Mul(e, self.factor())
        return e

    def factor(self) -> Expr:
        tok = self.tok
        if tok.kind == "-":
            self.i += 1
            if self.tok.kind == "number":
                return Const(-float(self.expect("number").text))
            return Neg(self.factor())
        if tok.kind == "number":
            self.i += 1
            return Const(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if self.known is not None and tok.text not in self.known:
                line, col = _line_col(self.text, tok.pos)
                raise UnknownVariableError(tok.text, line, col)
            return Var(tok.text)
        if tok.kind == "abs":
            self.i += 1
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return Abs(e)
        if tok.kind == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        self.fail(f"unexpected {tok.text or 'end of input'!r}")


class _Backtrack(Exception):
    pass


def _minus(e: Expr, c: Expr) -> Expr:
    if isinstance(c, Const) and c.value == 0.0 and math.copysign(1.0, c.value) > 0:
        return e
    return Sub(e, c)


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse_formula(text: str, variables: Optional[Iterable[str]] = None) -> Formula:
    """Parse ``text`` into a canonical formula.

    ``variables`` restricts the names atoms may mention; ``None`` accepts any.
    """
    known = None if variables is None else set(variables)
    return _Parser(text, known).parse()
