"""Workload scripts and generators.

A workload is an ordered list of ``Step``s. Steps of one process run in list
order, one outstanding operation at a time. Each step is invoked at the
latest of: its absolute ``at`` time, ``after`` ticks past the process's
previous response, and (with ``barrier``) the moment every earlier step in
the list has responded.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass

from .errors import ConfigurationError

ENQUEUE = "enqueue"
DEQUEUE = "dequeue"
OPS = (ENQUEUE, DEQUEUE)


@dataclass
class Step:
    process: int
    op: str
    at: int = 0
    after: int = 0
    barrier: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Step":
        return cls(**d)


def validate(steps: list[Step], n: int) -> None:
    for i, s in enumerate(steps):
        if not 0 <= s.process < n:
            raise ConfigurationError(f"step {i}: process {s.process} out of range for n={n}")
        if s.op not in OPS:
            raise ConfigurationError(f"step {i}: unknown op {s.op!r}")
        if s.at < 0 or s.after < 0:
            raise ConfigurationError(f"step {i}: negative time")


def sequential(ops: list[tuple[int, str]]) -> list[Step]:
    """Each operation waits for every earlier one to respond: no concurrency at all."""
    return [Step(p, op, barrier=True) for p, op in ops]


def random_mixed(n: int, num_ops: int, rng: random.Random, enq_bias: float = 0.55,
                 max_think: int = 3, max_start: int = 4) -> list[Step]:
    """Concurrent closed-loop clients with random think times and op mix."""
    steps = []
    first = [True] * n
    for _ in range(num_ops):
        p = rng.randrange(n)
        op = ENQUEUE if rng.random() < enq_bias else DEQUEUE
        at = rng.randint(0, max_start) if first[p] else 0
        first[p] = False
        steps.append(Step(p, op, at=at, after=rng.randint(0, max_think)))
    return steps


def random_sequential(n: int, num_ops: int, rng: random.Random) -> list[Step]:
    return sequential(
        [(rng.randrange(n), ENQUEUE if rng.random() < 0.55 else DEQUEUE) for _ in range(num_ops)]
    )


def gen_heavily_loaded(n: int, k: int, m: int, seed: int = 0, prefill: int | None = None) -> list[Step]:
    """Closed-loop workload keeping at least k more Enqueues than Dequeues in every prefix.

    ``m`` Dequeues per process. A prefill phase of ``prefill`` Enqueues
    (default 2k) finishes before anything else starts; after that each
    process loops Enqueue;Dequeue with zero think time. Since every Dequeue
    at a process is preceded in real time by its paired Enqueue, the
    surplus never drops below the prefill in any linearization.
    """
    if n < 1 or k < 1 or m < 1:
        raise ConfigurationError(f"infeasible heavy-load parameters n={n} k={k} m={m}")
    prefill = 2 * k if prefill is None else prefill
    if prefill < k:
        raise ConfigurationError(f"prefill {prefill} below k={k}")
    rng = random.Random(f"heavy-{seed}")
    steps = [Step(i % n, ENQUEUE, barrier=True) for i in range(prefill)]
    # the first loop step of each process waits for the prefill
    for p in sorted(range(n), key=lambda _: rng.random()):
        steps.append(Step(p, ENQUEUE, barrier=True))
    order = list(range(n))
    for _ in range(m - 1):
        for p in order:
            steps.append(Step(p, DEQUEUE))
            steps.append(Step(p, ENQUEUE))
    for p in order:
        steps.append(Step(p, DEQUEUE))
    return steps


def heavy_load_audit(ops_in_order: list[str], k: int) -> bool:
    """True iff the sequence starts with k Enqueues and every prefix keeps a surplus of k."""
    surplus = 0
    for i, op in enumerate(ops_in_order):
        surplus += 1 if op == ENQUEUE else -1
        if i < k and op != ENQUEUE:
            return False
        if i >= k - 1 and surplus < k:
            return False
    return True
