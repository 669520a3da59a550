"""Amortized Dequeue cost under heavy load, swept over the relaxation k."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from .audits import verify_trace
from .config import DelayModel, RunConfig
from .metrics import RunMetrics, compute_metrics
from .simnet import run
from .workload import gen_heavily_loaded

# The 4d/3 lower bound on Dequeue for pair-free operations is analytic only;
# nothing here measures against it.


@dataclass
class BenchRow:
    n: int
    k: int
    quota: int
    m: int
    d: int
    total_cost: int
    bound_sum: Optional[float]
    bound_closed: Optional[float]
    slow: int
    fast: int
    slow_fraction: float
    ratio_to_first: float
    ratio_to_fifo: float
    fifo_cost: int
    mean_group_size: float
    verified: bool

    @property
    def within_bound(self) -> bool:
        return self.bound_sum is None or self.total_cost <= self.bound_sum


def heavy_run(n: int, k: int, m: int, algorithm: str = "relaxed", delay: Optional[DelayModel] = None,
              seed: int = 0, label_policy: str = "bounded"):
    config = RunConfig(n=n, algorithm=algorithm, k=k, delay=delay or DelayModel.parse("fixed:1"),
                       seed=seed, label_policy=label_policy)
    trace = run(config, gen_heavily_loaded(n, k, m, seed))
    return trace, compute_metrics(trace)


def _row(n: int, k: int, metrics: RunMetrics, first_cost: int, fifo_cost: int, verified: bool) -> BenchRow:
    slow = sum(metrics.slow.values())
    fast = sum(metrics.fast.values())
    sizes = [g.size for g in metrics.groups]
    return BenchRow(
        n=n, k=k, quota=k // n, m=metrics.m, d=metrics.d, total_cost=metrics.total_dequeue_cost,
        bound_sum=metrics.bound_sum, bound_closed=metrics.bound_closed, slow=slow, fast=fast,
        slow_fraction=slow / metrics.m if metrics.m else 0.0,
        ratio_to_first=metrics.total_dequeue_cost / first_cost if first_cost else 0.0,
        ratio_to_fifo=metrics.total_dequeue_cost / fifo_cost if fifo_cost else 0.0,
        fifo_cost=fifo_cost,
        mean_group_size=sum(sizes) / len(sizes) if sizes else 0.0,
        verified=verified,
    )


def bench_amortized(n: int = 2, ks: Sequence[int] | None = None, m_per_process: int = 100,
                    delay: Optional[DelayModel] = None, seed: int = 0,
                    label_policy: str = "bounded", verify: bool = True) -> list[BenchRow]:
    """One heavily-loaded run per k (default n, 2n, 3n), plus the FIFO algorithm on
    the first k's workload as the unrelaxed baseline."""
    ks = list(ks) if ks else [n, 2 * n, 3 * n]
    _, fifo = heavy_run(n, ks[0], m_per_process, "fifo", delay, seed)
    rows = []
    first_cost = None
    for k in ks:
        trace, metrics = heavy_run(n, k, m_per_process, "relaxed", delay, seed, label_policy)
        verified = verify_trace(trace).ok if verify else True
        if first_cost is None:
            first_cost = metrics.total_dequeue_cost
        rows.append(_row(n, k, metrics, first_cost, fifo.total_dequeue_cost, verified))
    return rows


def to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    fields = list(asdict(rows[0])) if rows else []
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for r in rows:
        writer.writerow(asdict(r))
    return buf.getvalue()
