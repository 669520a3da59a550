"""Seeded fuzzing: random workloads under random and adversarial delays."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Optional

from . import workload as wl
from .audits import Report, verify_trace
from .config import DelayModel, RunConfig
from .errors import ProtocolViolation
from .simnet import Trace, adversarial_schedules, run


@dataclass
class FuzzCase:
    seed: int
    config: RunConfig
    steps: list[wl.Step]
    schedule: str


@dataclass
class FuzzOutcome:
    case: FuzzCase
    trace: Optional[Trace]
    report: Optional[Report]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.report is not None and self.report.ok

    def failures(self) -> list[str]:
        if self.error is not None:
            return [f"aborted: {self.error}"]
        return self.report.failures() if self.report else []


def make_case(algorithm: str, seed: int, n: Optional[int] = None, k: Optional[int] = None,
              max_n: int = 4, max_ops: int = 30, small_fraction: float = 0.3,
              label_policy: str = "bounded") -> FuzzCase:
    """Draw one case. About ``small_fraction`` of cases have at most 8 operations
    so the brute-force oracle can check them."""
    rng = random.Random(f"fuzz-{algorithm}-{seed}")
    n = n if n is not None else rng.randint(1, max_n)
    if algorithm == "relaxed" and k is None:
        k = rng.choice([1, n, 2 * n, 3 * n])
    k = k or 1
    num_ops = rng.randint(2, 8) if rng.random() < small_fraction else rng.randint(9, max_ops)
    schedules = adversarial_schedules(n, seed)
    names = ["uniform"] + sorted(schedules)
    name = rng.choice(names)
    if name == "uniform":
        delay = DelayModel("uniform", lo=1, hi=rng.randint(1, 8), self_delay=rng.choice([0, None]))
    else:
        delay = schedules[name]
    if rng.random() < 0.2:
        steps = wl.random_sequential(n, num_ops, rng)
    else:
        steps = wl.random_mixed(n, num_ops, rng, enq_bias=rng.choice([0.4, 0.55, 0.7]))
    config = RunConfig(n=n, algorithm=algorithm, k=k, delay=delay, seed=seed, label_policy=label_policy)
    return FuzzCase(seed, config, steps, name)


def run_case(case: FuzzCase) -> FuzzOutcome:
    """Run and verify one case. A protocol-violation abort is a failed outcome, not an exception."""
    try:
        trace = run(case.config, case.steps)
    except ProtocolViolation as exc:
        return FuzzOutcome(case, None, None, error=str(exc))
    return FuzzOutcome(case, trace, verify_trace(trace))


def fuzz(algorithm: str, runs: int, start_seed: int = 0, **kw) -> Iterator[FuzzOutcome]:
    for seed in range(start_seed, start_seed + runs):
        yield run_case(make_case(algorithm, seed, **kw))


@dataclass
class FuzzSummary:
    runs: int = 0
    failures: list[FuzzOutcome] = field(default_factory=list)
    oracle_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def summarize(outcomes) -> FuzzSummary:
    s = FuzzSummary()
    for o in outcomes:
        s.runs += 1
        if o.report is not None and o.report.oracle is not None:
            s.oracle_checked += 1
        if not o.ok:
            s.failures.append(o)
    return s
