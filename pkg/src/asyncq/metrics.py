"""Latency and amortized-cost metrics, expressed in units of the measured d."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Optional

from .lincheck import InstanceRecord, extract_instances
from .simnet import Trace, measure_d


@dataclass
class DequeueGroup:
    """A slow Dequeue and the fast Dequeues after it at the same process."""

    process: int
    leader: str
    size: int
    cost: int
    labels_granted: int  # effective l: labels the leader obtained for its invoker

    @property
    def average_cost(self) -> float:
        return self.cost / self.size


@dataclass
class RunMetrics:
    n: int
    k: int
    d: int
    latencies: dict[str, int]
    fast: dict[int, int]
    slow: dict[int, int]
    total_dequeue_cost: int
    bound_sum: Optional[float]  # sum_i ceil(m_i / floor(k/n)) * 2d
    bound_closed: Optional[float]  # ((m - n) / floor(k/n) + n) * 2d
    groups: list[DequeueGroup] = field(default_factory=list)

    @property
    def m(self) -> int:
        return sum(self.fast.values()) + sum(self.slow.values())

    def latency_over_d(self, iid: str) -> float:
        return self.latencies[iid] / self.d if self.d else 0.0

    def to_json(self) -> dict:
        out = asdict(self)
        out["m"] = self.m
        out["latencies_over_d"] = {i: self.latency_over_d(i) for i in self.latencies}
        out["fast"] = {str(p): c for p, c in self.fast.items()}
        out["slow"] = {str(p): c for p, c in self.slow.items()}
        return out


def theorem_bounds(m_per_process: dict[int, int], n: int, k: int, d: int) -> tuple[Optional[float], Optional[float]]:
    quota = k // n
    if quota == 0:
        return None, None
    m = sum(m_per_process.values())
    per_proc = sum(math.ceil(mi / quota) for mi in m_per_process.values())
    return per_proc * 2 * d, ((m - n) / quota + n) * 2 * d


def compute_metrics(trace: Trace, instances: Optional[list[InstanceRecord]] = None) -> RunMetrics:
    instances = instances if instances is not None else extract_instances(trace)
    n = trace.n
    k = int(trace.config.get("k", 1)) if trace.config.get("algorithm") == "relaxed" else 1
    d = measure_d(trace)
    latencies = {i.id: i.response_time - i.invoke_time for i in instances}
    fast: dict[int, int] = defaultdict(int)
    slow: dict[int, int] = defaultdict(int)
    for p in range(n):
        fast[p] = slow[p] = 0
    deqs = [i for i in instances if not i.is_enqueue]
    for i in deqs:
        (fast if i.is_fast else slow)[i.process] += 1
    total = sum(latencies[i.id] for i in deqs)
    m_i = {p: fast[p] + slow[p] for p in range(n)}
    bound_sum, bound_closed = theorem_bounds(m_i, n, k, d) if trace.config.get("algorithm") == "relaxed" else (None, None)

    granted = {}
    for e in trace.events:
        if e.kind == "label" and e.process == e.extra.get("beneficiary"):
            granted[e.instance] = len(e.value)
    groups: list[DequeueGroup] = []
    by_proc: dict[int, list[InstanceRecord]] = defaultdict(list)
    for i in sorted(deqs, key=lambda i: i.invoked_at):
        by_proc[i.process].append(i)
    for p, seq in sorted(by_proc.items()):
        current: Optional[DequeueGroup] = None
        for i in seq:
            if not i.is_fast:
                current = DequeueGroup(p, i.id, 0, 0, granted.get(i.id, 0))
                groups.append(current)
            if current is None:
                continue
            current.size += 1
            current.cost += latencies[i.id]
    return RunMetrics(n, k, d, latencies, dict(fast), dict(slow), total, bound_sum, bound_closed, groups)
