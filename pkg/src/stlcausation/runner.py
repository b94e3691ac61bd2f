"""Run one or all monitors over a sample stream and cross-check them."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

from .causation import QuantitativeCausationMonitor, _sign_verdict
from .classic import ClassicMonitor, Verdict, verdict_of
from .engine import NAIVE
from .epochs import BooleanCausationMonitor, CausationVerdict, EpochQuery
from .formula import Formula
from .reset import ResetMonitor
from .trace import DomainBounds

MONITORS = ("clam", "bcaum", "qcaum", "resm")


@dataclass(slots=True)
class StepRecord:
    monitor: str
    b: int
    t: float
    upper: Optional[float] = None
    lower: Optional[float] = None
    verdict: Optional[str] = None
    vio_distance: Optional[float] = None
    sat_distance: Optional[float] = None
    causation_verdict: Optional[str] = None
    boundary: Optional[bool] = None
    episode: Optional[int] = None
    monitor_time_ns: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


RECORD_FIELDS = [f.name for f in fields(StepRecord)]


class MonitorSet:
    """Feeds each sample to the selected monitors.

    With ``monitor="all"`` the classic, Boolean causation and quantitative
    causation outputs are read from one shared table (the causation table
    holds the classic intervals too); the reset monitor keeps its own.
    The shared update time is charged to each of the three records.
    """

    def __init__(
        self,
        formula: Formula,
        variables: Sequence[str],
        monitor: str = "all",
        step: float = 1.0,
        t0: float = 0.0,
        bounds: Optional[DomainBounds] = None,
        kernel: str = NAIVE,
        reset_on_satisfaction: bool = True,
    ):
        if monitor not in MONITORS + ("all",):
            raise ValueError(f"unknown monitor {monitor!r}")
        self.monitor = monitor
        self.step_size = step
        self.t0 = t0
        self.b = -1
        args = (formula, variables, step, bounds, kernel)
        self.clam = self.bcaum = self.qcaum = self.resm = None
        self.shared = None
        if monitor == "all":
            self.shared = QuantitativeCausationMonitor(*args)
            self.query = EpochQuery(self.shared.engine)
            self.resm = ResetMonitor(*args, reset_on_satisfaction=reset_on_satisfaction)
        elif monitor == "clam":
            self.clam = ClassicMonitor(*args)
        elif monitor == "bcaum":
            self.bcaum = BooleanCausationMonitor(*args)
        elif monitor == "qcaum":
            self.qcaum = QuantitativeCausationMonitor(*args)
        else:
            self.resm = ResetMonitor(*args, reset_on_satisfaction=reset_on_satisfaction)

    def push(self, row: Sequence[float]) -> list[StepRecord]:
        self.b += 1
        b = self.b
        t = self.t0 + b * self.step_size
        clock = time.perf_counter_ns
        out = []
        if self.shared is not None:
            t_start = clock()
            o = self.shared.push(row)
            t_shared = clock() - t_start
            lower, upper = self.shared.engine.interval()
            t_start = clock()
            cv = self.query.verdict()
            t_query = clock() - t_start
            out.append(_clam_record(b, t, lower, upper, t_shared))
            out.append(_bcaum_record(b, t, cv, t_shared + t_query))
            out.append(_qcaum_record(b, t, o, t_shared))
        if self.clam is not None:
            t_start = clock()
            iv = self.clam.push(row)
            out.append(_clam_record(b, t, iv.lower, iv.upper, clock() - t_start))
        if self.bcaum is not None:
            t_start = clock()
            cv = self.bcaum.push(row)
            out.append(_bcaum_record(b, t, cv, clock() - t_start))
        if self.qcaum is not None:
            t_start = clock()
            o = self.qcaum.push(row)
            out.append(_qcaum_record(b, t, o, clock() - t_start))
        if self.resm is not None:
            t_start = clock()
            r = self.resm.push(row)
            elapsed = clock() - t_start
            out.append(
                StepRecord(
                    "resm", b, t, upper=r.upper, lower=r.lower, verdict=r.verdict.value,
                    episode=r.episode, monitor_time_ns=elapsed,
                )
            )
        return out


def _clam_record(b, t, lower: float, upper: float, ns: int) -> StepRecord:
    return StepRecord(
        "clam", b, t, upper=upper, lower=lower,
        verdict=verdict_of(lower, upper).value, monitor_time_ns=ns,
    )


def _bcaum_record(b, t, cv: CausationVerdict, ns: int) -> StepRecord:
    return StepRecord("bcaum", b, t, causation_verdict=cv.value, monitor_time_ns=ns)


def _qcaum_record(b, t, o, ns: int) -> StepRecord:
    # the running extrema rebuild the classic interval, so its verdict comes for free
    return StepRecord(
        "qcaum", b, t, upper=o.running_upper, lower=o.running_lower,
        verdict=verdict_of(o.running_lower, o.running_upper).value, vio_distance=o.vio_distance,
        sat_distance=o.sat_distance, causation_verdict=o.derived_verdict.value,
        boundary=o.boundary, monitor_time_ns=ns,
    )


# ---------------------------------------------------------------------------
# Cross-checks and summaries over record streams
# ---------------------------------------------------------------------------


class CrossCheck:
    """Checks the refinement relations between monitors on one stream.

    * classic verdict vs. the history of Boolean causation verdicts;
    * signs of the causation distances vs. the Boolean causation verdict
      (skipped on exact zeros);
    * running extrema of the distances vs. the classic interval, exactly.
    """

    def __init__(self):
        self.seen_vio = False
        self.seen_sat = False
        self.steps = 0
        self.mismatches: dict = {"history": [], "signs": [], "reconstruction": []}

    def add(self, records: Sequence[StepRecord]) -> None:
        by = {r.monitor: r for r in records}
        clam, bc, q = by.get("clam"), by.get("bcaum"), by.get("qcaum")
        if clam is None or bc is None or q is None:
            raise ValueError("cross-checks need clam, bcaum and qcaum records")
        b = clam.b
        self.steps += 1
        self.seen_vio |= bc.causation_verdict == CausationVerdict.VIOLATION.value
        self.seen_sat |= bc.causation_verdict == CausationVerdict.SATISFACTION.value
        expected = (
            Verdict.FALSE if self.seen_vio else Verdict.TRUE if self.seen_sat else Verdict.UNKNOWN
        )
        if clam.verdict != expected.value:
            self.mismatches["history"].append(b)
        if q.vio_distance != 0 and q.sat_distance != 0:
            if _sign_verdict(q.vio_distance, q.sat_distance)[0].value != bc.causation_verdict:
                self.mismatches["signs"].append(b)
        if q.upper != clam.upper or q.lower != clam.lower or q.verdict != clam.verdict:
            self.mismatches["reconstruction"].append(b)

    @property
    def ok(self) -> bool:
        return not any(self.mismatches.values())


class Summary:
    """Counts verdict transitions and causation episodes per monitor."""

    def __init__(self):
        self.last: dict = {}
        self.transitions: dict = {}
        self.episodes: dict = {}
        self.resets = 0
        self.resm_violation_runs = 0
        self.steps = 0

    def add(self, records: Sequence[StepRecord]) -> None:
        for r in records:
            if r.monitor in ("clam", "resm"):
                key = r.monitor
                value = r.verdict
                if key == "resm" and value == Verdict.FALSE.value and self.last.get(key) != value:
                    self.resm_violation_runs += 1
                if key in self.last and self.last[key] != value:
                    self.transitions[key] = self.transitions.get(key, 0) + 1
                self.last[key] = value
                self.transitions.setdefault(key, 0)
            else:
                key = r.monitor
                value = r.causation_verdict
                prev = self.last.get(key)
                if value != CausationVerdict.IRRELEVANT.value and value != prev:
                    slot = self.episodes.setdefault(key, {"vio": 0, "sat": 0})
                    slot[value] += 1
                self.episodes.setdefault(key, {"vio": 0, "sat": 0})
                self.last[key] = value
            if r.monitor == "resm" and r.verdict is not None:
                if r.verdict != Verdict.UNKNOWN.value:
                    self.resets += 1
        self.steps += 1

    def lines(self) -> list[str]:
        out = [f"steps: {self.steps}"]
        for key, n in sorted(self.transitions.items()):
            out.append(f"{key} verdict transitions: {n}")
        for key, eps in sorted(self.episodes.items()):
            out.append(f"{key} causation episodes: vio={eps['vio']} sat={eps['sat']}")
        if "resm" in self.last:
            out.append(f"resm resets: {self.resets}")
            out.append(f"resm violation runs: {self.resm_violation_runs}")
        return out


def episodes(verdicts: Sequence[str], value: str) -> list[tuple]:
    """Maximal runs ``(first, last)`` of ``value`` in a verdict sequence."""
    runs = []
    start = None
    for i, v in enumerate(verdicts):
        if v == value and start is None:
            start = i
        elif v != value and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(verdicts) - 1))
    return runs


def fmt_float(x: Optional[float]) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)
