import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stlcausation.formula import (
    FALSE,
    TRUE,
    Abs,
    Add,
    Always,
    And,
    Atom,
    Const,
    Eventually,
    FalseConst,
    FormulaSyntaxError,
    IntervalError,
    Mul,
    Neg,
    Not,
    Or,
    Sub,
    UnknownVariableError,
    Until,
    Var,
    atoms,
    eval_expr,
    format_formula,
    grid_interval,
    horizon,
    iter_nodes,
    parse_formula,
    renumber,
)


def test_always_less_than_becomes_constant_minus_expr():
    f = parse_formula("alw_[0,100] (v < 10)", {"v"})
    assert f == Always((0.0, 100.0), Atom(0, Sub(Const(10.0), Var("v"))))


def test_eventually_less_than_zero():
    f = parse_formula("ev_[0,5] (a < 0)", {"a"})
    assert f == Eventually((0.0, 5.0), Atom(0, Sub(Const(0.0), Var("a"))))


def test_implication_desugars_to_disjunction():
    f = parse_formula("x > 0 -> x > 0")
    assert f == Or(Not(Atom(0, Var("x"))), Atom(1, Var("x")))


def test_greater_than_nonzero_constant():
    assert parse_formula("x > 2") == Atom(0, Sub(Var("x"), Const(2.0)))


def test_abs_less_than_expands_to_two_atoms():
    f = parse_formula("abs(x) < 3")
    assert f == And(Atom(0, Sub(Const(3.0), Var("x"))), Atom(1, Add(Const(3.0), Var("x"))))


def test_abs_greater_than_expands_to_disjunction():
    f = parse_formula("abs(x) > 3")
    assert isinstance(f, Or)
    assert [eval_expr(a.expr, {"x": 5.0}) for a in atoms(f)] == [2.0, -8.0]


def test_true_and_false_constants():
    assert parse_formula("true") == TRUE == Not(FalseConst())
    assert parse_formula("false") == FALSE


def test_precedence_not_until_and_or_implies():
    f = parse_formula("not x > 0 until_[0,1] y > 0 and x > 1 or y > 1 -> x > 2")
    assert isinstance(f, Or) and isinstance(f.left, Not)
    inner = f.left.arg
    assert isinstance(inner, Or)
    assert isinstance(inner.left, And)
    assert isinstance(inner.left.left, Until)
    assert isinstance(inner.left.left.left, Not)


def test_implication_is_right_associative():
    f = parse_formula("x > 0 -> y > 0 -> x > 1")
    assert isinstance(f, Or) and isinstance(f.right, Or)


def test_arithmetic_precedence_and_unary_minus():
    f = parse_formula("-x + 2 * y - 1 > 0")
    assert eval_expr(f.expr, {"x": 1.0, "y": 3.0}) == 4.0


def test_parenthesized_atom_and_formula():
    a = parse_formula("(x + 1) > (y)")
    b = parse_formula("((x > 0))")
    assert eval_expr(a.expr, {"x": 1.0, "y": 0.5}) == 1.5
    assert b == Atom(0, Var("x"))


def test_syntax_error_reports_line_and_column():
    with pytest.raises(FormulaSyntaxError) as err:
        parse_formula("alw_[0,2]\n  (x >> 0)")
    assert err.value.line == 2
    assert err.value.column == 7  # the second ">"


def test_unknown_variable():
    with pytest.raises(UnknownVariableError):
        parse_formula("z > 0", {"x"})


@pytest.mark.parametrize("text", ["alw_[3,1] x > 0", "ev_[-1,2] x > 0", "alw_[0,inf] x > 0"])
def test_bad_intervals_rejected(text):
    with pytest.raises((IntervalError, FormulaSyntaxError)):
        parse_formula(text)


def test_atom_ids_dense_left_to_right():
    f = parse_formula("(x > 0 and y > 0) or ev_[0,1] x < 3")
    assert [a.id for a in atoms(f)] == [0, 1, 2]
    assert eval_expr(atoms(f)[2].expr, {"x": 1.0}) == 2.0


def test_horizon_examples():
    assert horizon(parse_formula("x > 0")) == 0
    assert horizon(parse_formula("alw_[10,50] x > 0")) == 50
    afc3 = parse_formula("alw_[10,48] ((abs(e) > 0.08) -> ev_[0,2] (abs(e) < 0.08))")
    assert horizon(afc3) == 50
    assert horizon(parse_formula("(x > 0) until_[1,4] ev_[0,3] y > 0")) == 7


def test_atoms_examples():
    assert len(atoms(parse_formula("alw_[0,100] (v < 10)"))) == 1
    afc3 = parse_formula("alw_[10,48] ((abs(e) > 0.08) -> ev_[0,2] (abs(e) < 0.08))")
    assert len(atoms(afc3)) == 4
    assert atoms(FALSE) == []


def test_grid_interval_snaps_inwards():
    assert grid_interval((0.0, 1.5), 0.1) == (0, 15)
    assert grid_interval((0.25, 1.0), 0.5) == (1, 2)
    assert grid_interval((0.3, 0.3), 0.1) == (3, 3)
    with pytest.raises(IntervalError):
        grid_interval((0.2, 0.4), 0.5)


# -- properties --------------------------------------------------------------

_names = st.sampled_from(["x", "y", "speed"])
_consts = st.floats(-100, 100, allow_nan=False).map(lambda c: Const(c))


def _exprs():
    return st.recursive(
        st.one_of(_names.map(Var), _consts),
        lambda inner: st.one_of(
            inner.map(Neg),
            inner.map(Abs),
            st.tuples(inner, inner).map(lambda p: Add(*p)),
            st.tuples(inner, inner).map(lambda p: Sub(*p)),
            st.tuples(inner, inner).map(lambda p: Mul(*p)),
        ),
        max_leaves=5,
    )


_intervals = st.tuples(st.integers(0, 6), st.integers(0, 6)).map(
    lambda p: (float(min(p)), float(max(p)))
)


def _formulas():
    leaf = st.one_of(_exprs().map(lambda e: Atom(0, e)), st.just(FALSE))
    return st.recursive(
        leaf,
        lambda inner: st.one_of(
            inner.map(Not),
            st.tuples(inner, inner).map(lambda p: And(*p)),
            st.tuples(inner, inner).map(lambda p: Or(*p)),
            st.tuples(_intervals, inner).map(lambda p: Always(*p)),
            st.tuples(_intervals, inner).map(lambda p: Eventually(*p)),
            st.tuples(_intervals, inner, inner).map(lambda p: Until(*p)),
        ),
        max_leaves=6,
    ).map(renumber)


@given(_formulas())
def test_print_parse_round_trip(f):
    assert parse_formula(format_formula(f)) == f


@given(_formulas())
def test_no_implication_survives_and_negation_keeps_horizon(f):
    g = parse_formula(format_formula(f) + " -> x > 0")
    assert isinstance(g, Or) and isinstance(g.left, Not)
    assert horizon(Not(f)) == horizon(f)


@given(_formulas(), _intervals)
def test_horizon_monotone_under_embedding(f, iv):
    h = horizon(f)
    for wrap in (Always(iv, f), Eventually(iv, f), Until(iv, f, FALSE), And(f, FALSE)):
        assert horizon(wrap) >= h
    for sub in iter_nodes(f):
        assert horizon(sub) <= h


@given(_exprs(), st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_expression_evaluation_is_total(e, x, y, s):
    assert not math.isnan(eval_expr(e, {"x": x, "y": y, "speed": s}))
