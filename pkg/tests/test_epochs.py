import pytest
from hypothesis import given

from stlcausation.bench import SPEED_LIMIT, speed_limit_trace
from stlcausation.classic import ClassicMonitor, Verdict, derive_verdict, interval_at
from stlcausation.engine import DEQUE, SteppingError
from stlcausation.epochs import (
    BooleanCausationMonitor,
    CausationVerdict,
    bcaum_step,
    causation_from_epochs,
    satisfaction_epoch,
    violation_epoch,
)
from stlcausation.formula import atoms, parse_formula
from stlcausation.trace import Trace

from strategies import formula_and_trace
from worked_example import RUNNING_SPEC, running_trace

VIO, SAT, IRR = CausationVerdict.VIOLATION, CausationVerdict.SATISFACTION, CausationVerdict.IRRELEVANT


def xs(*values):
    return Trace.from_columns({"x": list(values)})


def test_running_example_epoch_at_30_and_35():
    f = parse_formula(RUNNING_SPEC)
    a1, a2 = (a.id for a in atoms(f))
    expected = {(a1, t) for t in range(20, 26)} | {(a2, t) for t in range(20, 31)}
    tr = running_trace()
    assert violation_epoch(tr.view(30), f) == expected
    assert violation_epoch(tr.view(35), f) == expected


def test_always_epoch_holds_only_the_violating_instant():
    f = parse_formula("alw_[0,2] (x > 0)")
    assert violation_epoch(xs(1.0, 2.0, -1.0).view(2), f) == {(0, 2)}


def test_eventually_satisfaction_epoch():
    f = parse_formula("ev_[0,2] (x > 0)")
    assert satisfaction_epoch(xs(-1.0, 3.0).view(1), f) == {(0, 1)}


def test_satisfaction_epoch_empty_without_positive_lower_bound():
    f = parse_formula("alw_[0,2] (x > 0)")
    assert satisfaction_epoch(xs(1.0, 2.0).view(1), f) == frozenset()


def test_negation_swaps_polarity():
    f = parse_formula("not (x > 0)")
    assert satisfaction_epoch(xs(-2.0).view(0), f) == {(0, 0)}
    assert violation_epoch(xs(-2.0).view(0), f) == frozenset()


def test_bcaum_on_three_samples():
    tr = xs(1.0, 2.0, -1.0)
    mon = BooleanCausationMonitor(parse_formula("alw_[0,2] (x > 0)"), ("x",))
    assert [bcaum_step(mon, tr.view(b)) for b in range(3)] == [IRR, IRR, VIO]


def test_bcaum_irrelevant_while_inconclusive():
    tr = xs(1.0, 2.0, 3.0, 0.5)
    mon = BooleanCausationMonitor(parse_formula("alw_[0,10] (x > 0)"), ("x",))
    assert set(mon.run(tr)) == {IRR}


def test_bcaum_running_example_marks_the_episode():
    f = parse_formula(RUNNING_SPEC)
    tr = running_trace()
    out = BooleanCausationMonitor(f, tr.variables).run(tr)
    assert out[:25] == [IRR] * 25
    assert out[25:31] == [VIO] * 6
    assert out[31:] == [IRR] * 5


def test_bcaum_speed_limit_two_episodes():
    tr = speed_limit_trace()
    out = BooleanCausationMonitor(parse_formula(SPEED_LIMIT), tr.variables).run(tr)
    vio = [b for b, v in enumerate(out) if v is VIO]
    assert vio == list(range(20, 35)) + list(range(41, 45))


def test_bcaum_rejects_skipped_sample():
    tr = xs(1.0, 2.0)
    mon = BooleanCausationMonitor(parse_formula("x > 0"), ("x",))
    with pytest.raises(SteppingError):
        mon.step(tr.view(1))


# -- properties --------------------------------------------------------------


@given(formula_and_trace(constants=False))
def test_streaming_verdict_matches_full_epochs(ft):
    f, tr = ft
    for kernel in ("naive", DEQUE):
        mon = BooleanCausationMonitor(f, tr.variables, kernel=kernel)
        for b in range(len(tr)):
            view = tr.view(b)
            assert mon.step(view) is causation_from_epochs(view, f)


@given(formula_and_trace())
def test_epoch_guards_match_strict_bound_signs(ft):
    f, tr = ft
    for b in range(len(tr)):
        view = tr.view(b)
        iv = interval_at(view, f)
        vio, sat = violation_epoch(view, f), satisfaction_epoch(view, f)
        assert all(t <= b for _, t in vio | sat)
        if iv.upper == 0 or iv.lower == 0:
            continue
        assert bool(vio) == (iv.upper < 0)
        assert bool(sat) == (iv.lower > 0)
        if not vio and not sat:
            assert iv.upper > 0 and iv.lower < 0


@given(formula_and_trace())
def test_first_violation_instant_is_in_the_epoch(ft):
    f, tr = ft
    mon = ClassicMonitor(f, tr.variables)
    for b in range(len(tr)):
        if mon.step(tr.view(b)).upper < 0:
            assert any(t == b for _, t in violation_epoch(tr.view(b), f))
            break


@given(formula_and_trace())
def test_causation_history_refines_classic_verdict(ft):
    f, tr = ft
    clam = ClassicMonitor(f, tr.variables)
    bcaum = BooleanCausationMonitor(f, tr.variables)
    seen = set()
    for b in range(len(tr)):
        verdict = derive_verdict(clam.step(tr.view(b)))
        seen.add(bcaum.step(tr.view(b)))
        if VIO in seen:
            assert verdict is Verdict.FALSE
        elif SAT in seen:
            assert verdict is Verdict.TRUE
        else:
            assert verdict is Verdict.UNKNOWN
