import csv
import io
import itertools
import json
import subprocess
import sys

import pytest

from stlcausation import runner
from stlcausation.bench import SPEED_LIMIT, speed_limit_trace
from stlcausation.cli import main, parse_records
from stlcausation.runner import RECORD_FIELDS
from stlcausation.trace import csv_text


@pytest.fixture
def files(tmp_path):
    def make(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return make


def cli(*argv, stdin=""):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdin=io.StringIO(stdin), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


THREE = "time,x\n0,1\n1,2\n2,-1\n"


def test_three_json_lines(files):
    spec = files("s.stl", "alw_[0,2] (x > 0)\n")
    code, out, err = cli("--spec", spec, "--trace", files("t.csv", THREE), "--monitor", "qcaum")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 3
    third = json.loads(lines[2])
    assert third["verdict"] == "false"
    assert third["causation_verdict"] == "vio"
    assert "qcaum causation episodes: vio=1 sat=0" in err


def test_irrelevant_fields_are_null(files):
    spec = files("s.stl", "alw_[0,2] (x > 0)")
    _, out, _ = cli("--spec", spec, "--trace", files("t.csv", THREE), "--monitor", "bcaum")
    rec = json.loads(out.splitlines()[0])
    assert rec["causation_verdict"] == "irrelevant"
    assert all(rec[k] is None for k in ("upper", "lower", "verdict", "vio_distance", "episode"))


def test_resm_records_carry_episode(files):
    spec = files("s.stl", "alw_[0,1] (x > 0)")
    trace = files("t.csv", "time,x\n0,1\n1,2\n2,-1\n3,5\n")
    _, out, err = cli("--spec", spec, "--trace", trace, "--monitor", "resm")
    assert [json.loads(line)["episode"] for line in out.splitlines()] == [0, 0, 1, 2]
    assert "resm resets: 2" in err


def test_all_mode_on_speed_limit_trace(files, tmp_path):
    spec = files("s.stl", SPEED_LIMIT)
    trace = files("t.csv", csv_text(speed_limit_trace()))
    plot = tmp_path / "plot.csv"
    code, out, err = cli("--spec", spec, "--trace", trace, "--plot-out", str(plot))
    assert code == 0
    assert "cross-checks: ok" in err
    recs = [json.loads(line) for line in out.splitlines()]
    clam = [r for r in recs if r["monitor"] == "clam"]
    qcaum = [r for r in recs if r["monitor"] == "qcaum"]
    assert len(clam) == len(qcaum) == 101
    assert {r["upper"] for r in clam[30:]} == {-5.0}
    assert qcaum[34]["vio_distance"] < 0 < qcaum[35]["vio_distance"]
    assert qcaum[41]["vio_distance"] < 0
    rows = list(csv.DictReader(plot.open()))
    assert {r["series"] for r in rows} == {"upper", "lower", "vio_distance", "sat_distance"}
    assert len(rows) == 4 * 101


def test_json_and_csv_agree_field_for_field(files, monkeypatch):
    spec = files("s.stl", "(x > 0) until_[1,3] (ev_[0,2] x > 2)")
    trace = files("t.csv", "time,x\n" + "".join(f"{k},{(k * 7) % 5 - 2.5}\n" for k in range(12)))
    runs = {}
    for fmt in ("json", "csv"):
        ticks = itertools.count(0, 1000)
        monkeypatch.setattr(runner.time, "perf_counter_ns", lambda: next(ticks))
        code, out, _ = cli("--spec", spec, "--trace", trace, "--format", fmt)
        assert code == 0
        runs[fmt] = parse_records(out, fmt)
    assert runs["json"] == runs["csv"]
    assert len(runs["json"]) == 48
    assert list(runs["json"][0]) == RECORD_FIELDS


def test_bounds_file(files):
    spec = files("s.stl", "alw_[0,5] (x < 10)")
    bounds = files("b.json", '{"x": [0, 20]}')
    _, out, _ = cli("--spec", spec, "--trace", files("t.csv", THREE), "--monitor", "clam",
                    "--bounds", bounds)
    assert json.loads(out.splitlines()[0])["lower"] == -10.0


def test_standard_input_and_delta(files):
    spec = files("s.stl", "alw_[0,1] (x > 0)")
    code, out, _ = cli("--spec", spec, "--trace", "-", "--monitor", "clam", "--delta", "0.5",
                       stdin="time,x\n0,1\n0.5,2\n1.0,3\n")
    assert code == 0
    assert [json.loads(line)["t"] for line in out.splitlines()] == [0.0, 0.5, 1.0]


def test_comments_in_spec_file(files):
    spec = files("s.stl", "# speed limit\nalw_[0,2] (x > 0)  # three samples\n")
    code, _, _ = cli("--spec", spec, "--trace", files("t.csv", THREE))
    assert code == 0


@pytest.mark.parametrize("trace", ["", "time,x\n"])
def test_empty_trace_exits_3(files, trace):
    spec = files("s.stl", "x > 0")
    code, out, err = cli("--spec", spec, "--trace", files("t.csv", trace))
    assert code == 3 and out == "" and "empty" in err


def test_bad_row_exits_3_after_streaming_good_rows(files):
    spec = files("s.stl", "x > 0")
    code, out, err = cli("--spec", spec, "--trace", files("t.csv", "time,x\n0,1\n1,2\n2,oops\n"),
                         "--monitor", "clam")
    assert code == 3
    assert len(out.splitlines()) == 2
    assert "line 4" in err


def test_missing_column_exits_3(files):
    code, _, err = cli("--spec", files("s.stl", "y > 0"), "--trace", files("t.csv", THREE))
    assert code == 3 and "'y'" in err


def test_parse_error_exits_2(files):
    code, _, err = cli("--spec", files("s.stl", "alw_[0,2 (x > 0)"), "--trace", files("t.csv", THREE))
    assert code == 2 and "line 1, column" in err


def test_bad_bounds_exit_2(files):
    spec = files("s.stl", "x > 0")
    code, _, _ = cli("--spec", spec, "--trace", files("t.csv", THREE), "--bounds", files("b.json", "[1]"))
    assert code == 2


def test_streaming_flushes_each_sample(files):
    spec = files("s.stl", "alw_[0,3] (x > 0)")
    proc = subprocess.Popen(
        [sys.executable, "-m", "stlcausation.cli", "--spec", spec, "--trace", "-",
         "--monitor", "clam", "--delta", "1"],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    try:
        proc.stdin.write("time,x\n0,1\n")
        proc.stdin.flush()
        first = json.loads(proc.stdout.readline())
        assert first["b"] == 0 and first["upper"] == 1.0
        proc.stdin.write("1,-2\n")
        proc.stdin.flush()
        assert json.loads(proc.stdout.readline())["verdict"] == "false"
    finally:
        proc.stdin.close()
        proc.wait(timeout=30)
    assert proc.returncode == 0


# -- bench and gen-trace ------------------------------------------------------


def test_bench_unknown_name_is_usage_error():
    with pytest.raises(SystemExit) as err:
        cli("bench", "AFC9")
    assert err.value.code == 2


def test_bench_at1_reports_two_violation_episodes():
    code, out, _ = cli("bench", "AT1")
    assert code == 0
    assert "bcaum violation episodes: 2" in out
    assert "cross-checks: ok" in out


def test_bench_missing_columns_exit_3(files):
    code, _, err = cli("bench", "AT1", files("t.csv", THREE))
    assert code == 3 and "speed" in err


def test_gen_trace_round_trips_through_bench(files):
    code, out, _ = cli("gen-trace", "afc", "--duration", "52", "--excursion", "20,21")
    assert code == 0 and out.startswith("time,AF,AFref\n")
    code, report, _ = cli("bench", "AFC1", files("afc.csv", out))
    assert code == 0 and "qcaum violation episodes: 1" in report
