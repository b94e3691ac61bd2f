import io
import math

import pytest

from stlcausation.classic import ClassicMonitor
from stlcausation.formula import atoms, horizon_samples, parse_formula
from stlcausation.trace import (
    BeyondPrefixError,
    DomainBounds,
    EvictedError,
    Trace,
    TraceError,
    TraceFormatError,
    atom_bounds,
    csv_text,
    iter_csv,
    read_csv,
    value_at,
)


def test_append_returns_indices_and_times():
    tr = Trace(("x",), step=0.5, t0=2.0)
    assert tr.append((1.0,)) == 0
    assert tr.append((2.0,)) == 1
    assert (tr.time_of(0), tr.time_of(1)) == (2.0, 2.5)


def test_append_rejects_bad_rows():
    tr = Trace(("x", "y"))
    with pytest.raises(TraceError):
        tr.append((1.0,))
    with pytest.raises(TraceError):
        tr.append((1.0, math.nan))
    with pytest.raises(TraceError):
        tr.append((math.inf, 0.0))


def test_value_at_within_and_beyond_prefix():
    tr = Trace.from_columns({"x": [1.0, 2.0, -1.0, 7.0]})
    view = tr.view(2)
    assert value_at(view, "x", 1) == 2.0
    with pytest.raises(BeyondPrefixError):
        value_at(view, "x", 3)


def test_eviction_keeps_indices_stable():
    # horizon of two samples
    tr = Trace(("x",), retain=2)
    for k in range(5):
        assert tr.append((float(k),)) == k
    view = tr.view()
    assert value_at(view, "x", 4) == 4.0
    assert value_at(view, "x", 2) == 2.0
    with pytest.raises(EvictedError):
        value_at(view, "x", 0)


def test_eviction_trims_storage_in_batches():
    tr = Trace(("x",), retain=3)
    for k in range(1000):
        tr.append((float(k),))
    assert tr.first_retained > 0
    assert tr.value("x", 999) == 999.0
    with pytest.raises(EvictedError):
        tr.value("x", 995)


def test_prefix_stability():
    tr = Trace.from_columns({"x": [1.0, 2.0]})
    before = [tr.row(k) for k in range(2)]
    tr.append((5.0,))
    assert [tr.row(k) for k in range(2)] == before


def test_atom_bounds_affine():
    a = atoms(parse_formula("v < 10"))[0]
    assert atom_bounds(a, DomainBounds({"v": (0.0, 20.0)})) == (-10.0, 10.0)


def test_atom_bounds_unbounded():
    a = atoms(parse_formula("v < 10"))[0]
    assert atom_bounds(a, None) == (-math.inf, math.inf)
    assert atom_bounds(a, DomainBounds({})) == (-math.inf, math.inf)


def test_atom_bounds_abs_leg():
    a = atoms(parse_formula("abs(AF - AFref) < 0.1"))[0]
    lo, hi = atom_bounds(a, DomainBounds({"AF": (0.0, 2.0), "AFref": (0.0, 2.0)}))
    assert lo == pytest.approx(-1.9, abs=1e-12)
    assert hi == pytest.approx(2.1, abs=1e-12)


def test_atom_bounds_product_and_abs():
    a = atoms(parse_formula("x * y - abs(x) > 0"))[0]
    lo, hi = atom_bounds(a, DomainBounds({"x": (-1.0, 2.0), "y": (3.0, 4.0)}))
    assert (lo, hi) == (-6.0, 8.0)


def test_reversed_bounds_rejected():
    with pytest.raises(ValueError):
        DomainBounds({"x": (1.0, 0.0)})


# -- CSV ---------------------------------------------------------------------


def test_csv_round_trip():
    tr = Trace.from_columns({"x": [1.0, -2.5], "y": [0.1, 3.0]}, step=0.1, t0=1.0)
    back = read_csv(io.StringIO(csv_text(tr)))
    assert back.variables == ("x", "y")
    assert back.step == pytest.approx(0.1)
    assert [back.row(k) for k in range(2)] == [tr.row(k) for k in range(2)]


def test_csv_step_override_and_grid_check():
    text = "time,x\n0,1\n0.5,2\n1.0,3\n"
    assert len(read_csv(io.StringIO(text), step=0.5)) == 3
    with pytest.raises(TraceFormatError, match="grid"):
        read_csv(io.StringIO(text), step=0.25)
    with pytest.raises(TraceFormatError, match="grid"):
        read_csv(io.StringIO("time,x\n0,1\n1,2\n2.5,3\n"))


@pytest.mark.parametrize(
    "text, message",
    [
        ("", "empty"),
        ("time,x\n", "empty"),
        ("t,x\n0,1\n", "time"),
        ("time,x\n0,1\n1,abc\n", "non-numeric"),
        ("time,x\n0,1\n1,2,3\n", "fields"),
        ("time,x\n0,1\n1,inf\n", "non-finite"),
        ("time,x\n1,1\n0,2\n", "increasing"),
    ],
)
def test_csv_errors(text, message):
    with pytest.raises(TraceFormatError, match=message):
        read_csv(io.StringIO(text))


def test_iter_csv_streams_rows():
    it = iter_csv(io.StringIO("time,a,b\n0,1,2\n1,3,4\n"))
    assert next(it) == (["a", "b"], 1.0, 0.0)
    assert list(it) == [(0, (1.0, 2.0)), (1, (3.0, 4.0))]


def test_eviction_does_not_change_monitor_outputs():
    f = parse_formula("alw_[0,3] (x > 0 or ev_[1,2] x > 1)")
    hor = horizon_samples(f, 1.0)
    values = [math.sin(0.7 * k) * 3 for k in range(40)]
    full = Trace(("x",))
    short = Trace(("x",), retain=hor)
    m1 = ClassicMonitor(f, ("x",))
    m2 = ClassicMonitor(f, ("x",))
    for v in values:
        full.append((v,))
        short.append((v,))
        assert m1.step(full.view()) == m2.step(short.view())
