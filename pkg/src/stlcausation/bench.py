"""Benchmark specifications, synthetic traces and a timing harness."""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .formula import Formula, parse_formula, variables
from .runner import MONITORS, CrossCheck, MonitorSet, episodes
from .trace import DomainBounds, Trace, TraceError

SPECS = {
    "AFC1": "alw_[10,50] (abs(AF - AFref) < 0.1)",
    "AFC2": "alw_[10,48.5] ev_[0,1.5] (abs(AF - AFref) < 0.08)",
    "AFC3": "alw_[10,48] ((abs(AF - AFref) > 0.08) -> ev_[0,2] (abs(AF - AFref) < 0.08))",
    "AT1": "alw_[0,27] ((speed > 50) -> ev_[1,3] (RPM < 3000))",
}

AF_REF = 14.7

SPEED_LIMIT = "alw_[0,100] (speed < 10)"

# (instant, speed) knots of a trace with two violation episodes, [20, 34] and [41, 44];
# the first peak (15 at b = 30) is higher than the second (13 at b = 43)
SPEED_KNOTS = ((0, 2.0), (10, 9.0), (15, 6.0), (19, 9.5), (20, 10.5), (30, 15.0),
               (35, 9.5), (40, 8.0), (41, 11.0), (43, 13.0), (44, 11.0), (45, 8.0),
               (100, 5.0))


def spec(name: str) -> Formula:
    try:
        return parse_formula(SPECS[name])
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; choose from {sorted(SPECS)}") from None


def at1_stretched(samples: int) -> Formula:
    """AT1's nesting with the outer window widened to span ``samples`` (step 1)."""
    return parse_formula(f"alw_[0,{samples - 4}] ((speed > 50) -> ev_[1,3] (RPM < 3000))")


def at_trace(
    duration: float = 30.0,
    step: float = 0.1,
    excursions: Sequence[tuple] = ((6.0, 9.5), (16.0, 19.5)),
    seed: int = 0,
) -> Trace:
    """Speed above 50 after a short ramp; RPM above 3000 only inside ``excursions``."""
    rng = random.Random(seed)
    trace = Trace(("speed", "RPM"), step=step)
    n = int(round(duration / step)) + 1
    for k in range(n):
        t = k * step
        speed = min(80.0, 40.0 + 10.0 * t) + rng.uniform(-0.5, 0.5)
        rpm = 2200.0 + rng.uniform(-150.0, 150.0)
        if any(a - 1e-9 <= t <= z + 1e-9 for a, z in excursions):
            rpm = 3400.0 + rng.uniform(-100.0, 100.0)
        trace.append((speed, rpm))
    return trace


def afc_trace(
    duration: float = 55.0,
    step: float = 0.1,
    excursions: Sequence[tuple] = (),
    seed: int = 0,
) -> Trace:
    """``AF`` tracks ``AFref`` within 0.05 except inside ``excursions``."""
    rng = random.Random(seed)
    trace = Trace(("AF", "AFref"), step=step)
    n = int(round(duration / step)) + 1
    for k in range(n):
        t = k * step
        dev = rng.uniform(-0.05, 0.05)
        if any(a - 1e-9 <= t <= z + 1e-9 for a, z in excursions):
            dev = 0.15 + rng.uniform(0.0, 0.1)
        trace.append((AF_REF + dev, AF_REF))
    return trace


def perf_trace(samples: int, seed: int = 0) -> Trace:
    """Step-1 speed/RPM signal with recurring RPM excursions."""
    rng = random.Random(seed)
    trace = Trace(("speed", "RPM"), step=1.0)
    speed, rpm = 60.0, 2500.0
    for _ in range(samples):
        speed = min(120.0, max(0.0, speed + rng.uniform(-3.0, 3.0)))
        rpm = min(6000.0, max(800.0, rpm + rng.uniform(-250.0, 250.0)))
        trace.append((speed, rpm))
    return trace


def speed_limit_trace() -> Trace:
    """Step-1 ``speed`` signal over [0, 100], linear between :data:`SPEED_KNOTS`."""
    trace = Trace(("speed",), step=1.0)
    knots = SPEED_KNOTS
    for k in range(knots[-1][0] + 1):
        for (a, va), (z, vz) in zip(knots, knots[1:]):
            if a <= k <= z:
                trace.append((va + (vz - va) * (k - a) / (z - a),))
                break
    return trace


@dataclass
class BenchReport:
    name: str
    samples: int
    mean_ns: dict = field(default_factory=dict)
    stdev_ns: dict = field(default_factory=dict)
    total_s: dict = field(default_factory=dict)
    vio_episodes: dict = field(default_factory=dict)
    resets: int = 0
    checks_ok: bool = True
    mismatches: dict = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"{self.name}: {self.samples} samples"]
        for m in MONITORS:
            if m in self.mean_ns:
                out.append(
                    f"  {m:6s} mean {self.mean_ns[m] / 1e3:9.2f} us/step"
                    f"  stdev {self.stdev_ns[m] / 1e3:9.2f}  total {self.total_s[m]:.3f} s"
                )
        for m, n in sorted(self.vio_episodes.items()):
            out.append(f"  {m} violation episodes: {n}")
        out.append(f"  resm resets: {self.resets}")
        out.append(f"  cross-checks: {'ok' if self.checks_ok else self.mismatches}")
        return out


def bench(
    name: str,
    trace: Trace,
    formula: Optional[Formula] = None,
    bounds: Optional[DomainBounds] = None,
    kernel: str = "deque",
) -> BenchReport:
    """Run each monitor on its own over ``trace`` and cross-check the streams."""
    f = formula if formula is not None else spec(name)
    missing = variables(f) - set(trace.variables)
    if missing:
        raise TraceError(f"trace lacks variables {sorted(missing)} needed by {name}")
    report = BenchReport(name, len(trace))
    streams: dict = {}
    for m in MONITORS:
        ms = MonitorSet(f, trace.variables, m, trace.step, trace.t0, bounds, kernel)
        recs = [ms.push(trace.row(k))[0] for k in range(len(trace))]
        times = [r.monitor_time_ns for r in recs]
        report.mean_ns[m] = statistics.fmean(times)
        report.stdev_ns[m] = statistics.pstdev(times)
        report.total_s[m] = sum(times) / 1e9
        streams[m] = recs
        if m == "resm":
            report.resets = ms.resm.episode
    check = CrossCheck()
    for k in range(len(trace)):
        check.add([streams["clam"][k], streams["bcaum"][k], streams["qcaum"][k]])
    report.checks_ok = check.ok
    report.mismatches = {k: v[:10] for k, v in check.mismatches.items() if v}
    report.vio_episodes["bcaum"] = len(
        episodes([r.causation_verdict for r in streams["bcaum"]], "vio")
    )
    report.vio_episodes["qcaum"] = len(
        episodes([r.causation_verdict for r in streams["qcaum"]], "vio")
    )
    return report
