"""Monitor with reset: a classic interval monitor that restarts after every
conclusive verdict.

This is a reconstruction from a one-sentence description: once the monitor
reaches a verdict at sample ``b`` it discards everything seen so far and
monitors the same formula on the signal that starts at ``b + 1``. Whether
satisfaction verdicts also trigger a restart is configurable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .classic import RobustnessInterval, Verdict, derive_verdict, expect_next
from .engine import NAIVE, Engine
from .formula import Formula
from .trace import DomainBounds, PrefixView, Trace


@dataclass(frozen=True)
class ResetOutput:
    b: int
    interval: RobustnessInterval
    verdict: Verdict
    episode: int
    reset: bool

    @property
    def lower(self) -> float:
        return self.interval.lower

    @property
    def upper(self) -> float:
        return self.interval.upper


class ResetMonitor:
    def __init__(
        self,
        formula: Formula,
        variables: Sequence[str],
        step: float = 1.0,
        bounds: Optional[DomainBounds] = None,
        kernel: str = NAIVE,
        reset_on_satisfaction: bool = True,
    ):
        self.kernel = kernel
        self.reset_on_satisfaction = reset_on_satisfaction
        self.resets: list[int] = []
        self.origin = 0
        self.b = -1
        self._inner = Engine(formula, variables, step, bounds, kernel=kernel)

    @property
    def b_index(self) -> int:
        return self.b

    @property
    def episode(self) -> int:
        return len(self.resets)

    def push(self, row: Sequence[float]) -> ResetOutput:
        self.b += 1
        inner = self._inner
        inner.step(row)
        interval = RobustnessInterval(*inner.interval())
        verdict = derive_verdict(interval)
        episode = len(self.resets)
        reset = verdict is Verdict.FALSE or (
            verdict is Verdict.TRUE and self.reset_on_satisfaction
        )
        if reset:
            self.resets.append(self.b)
            self.origin = self.b + 1
            self._inner.restart()
        return ResetOutput(self.b, interval, verdict, episode, reset)

    def step(self, view: PrefixView) -> ResetOutput:
        expect_next(self.b, view)
        return self.push(view.row(view.b_index))

    def run(self, trace: Trace) -> list[ResetOutput]:
        return [self.step(trace.view(b)) for b in range(len(trace))]


def resm_step(state: ResetMonitor, view: PrefixView) -> tuple:
    out = state.step(view)
    return out.interval, out.episode
