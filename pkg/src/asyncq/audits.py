"""Whole-trace audits of the invariants both algorithms are supposed to keep.

Each audit returns a list of human-readable problems; empty means it passed.
``verify_trace`` runs all of them plus the witness and (for small runs) the
brute-force oracle.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from . import lincheck
from .lincheck import InstanceRecord, Verdict
from .simnet import Trace, check_admissible, measure_d

DEQ_OPS = ("deq", "deq_s", "deq_f")


def local_exec_order(trace: Trace) -> list[str]:
    problems = []
    last: dict[int, tuple] = {}
    for e in trace.events:
        if e.kind == "local_exec" and e.op in DEQ_OPS:
            prev = last.get(e.process)
            if prev is not None and not e.ts > prev:
                problems.append(f"p{e.process} executed Dequeue {e.ts} after {prev}")
            last[e.process] = e.ts
    return problems


def replica_convergence(trace: Trace) -> list[str]:
    snaps = {p: json.dumps(s, sort_keys=True) for p, s in trace.snapshots.items()}
    if len(snaps) != trace.n:
        return [f"expected {trace.n} snapshots, found {len(snaps)}"]
    ref = snaps[0]
    return [f"p{p} replica differs from p0" for p, s in sorted(snaps.items()) if s != ref]


def dequeue_agreement(trace: Trace) -> list[str]:
    """Every process executes every Dequeue exactly once and removes the same value."""
    seen: dict[tuple, dict[int, object]] = defaultdict(dict)
    problems = []
    for e in trace.events:
        if e.kind == "local_exec" and e.op in DEQ_OPS:
            if e.process in seen[e.ts]:
                problems.append(f"p{e.process} executed Dequeue {e.ts} twice")
            seen[e.ts][e.process] = e.value
    for ts, by_proc in seen.items():
        if len(by_proc) != trace.n:
            problems.append(f"Dequeue {ts} executed at {len(by_proc)} of {trace.n} processes")
        if len(set(map(repr, by_proc.values()))) > 1:
            problems.append(f"Dequeue {ts} removed different values: {by_proc}")
    missed = {p: c for p, c in trace.missed_removals.items() if c}
    if missed:
        problems.append(f"fast-Dequeue removals found value absent: {missed}")
    return problems


def _labels_by_deq(trace: Trace) -> dict[tuple, dict[int, tuple]]:
    out: dict[tuple, dict[int, tuple]] = defaultdict(dict)
    for e in trace.events:
        if e.kind == "label":
            out[e.ts][e.process] = (e.extra["beneficiary"], tuple(e.value))
    return out


def label_agreement(trace: Trace) -> list[str]:
    problems = []
    for ts, by_proc in _labels_by_deq(trace).items():
        if len(by_proc) != trace.n:
            problems.append(f"slow Dequeue {ts} labeled at {len(by_proc)} of {trace.n} processes")
        if len(set(by_proc.values())) > 1:
            problems.append(f"slow Dequeue {ts} labeled differently: {by_proc}")
    return problems


def label_ownership(trace: Trace, instances: list[InstanceRecord]) -> list[str]:
    """A value labeled for p is only ever returned by a Dequeue invoked at p."""
    owner: dict[object, int] = {}
    problems = []
    for by_proc in _labels_by_deq(trace).values():
        for beneficiary, values in by_proc.values():
            for v in values:
                if owner.setdefault(v, beneficiary) != beneficiary:
                    problems.append(f"value {v!r} labeled for both p{owner[v]} and p{beneficiary}")
    for inst in instances:
        if inst.is_enqueue or inst.value is None:
            continue
        if inst.value in owner and owner[inst.value] != inst.process:
            problems.append(
                f"{inst.id} at p{inst.process} returned {inst.value!r} labeled for p{owner[inst.value]}"
            )
    return problems


def label_safety(trace: Trace, instances: list[InstanceRecord], witness: list[str], k: int) -> list[str]:
    """Values labeled by a slow Dequeue are among the first k unmatched in the witness prefix ending at it."""
    labels = _labels_by_deq(trace)
    by_ts = {i.ts: i for i in instances}
    table = {i.id: i for i in instances}
    labeled_at: dict[str, tuple] = {}
    for ts, by_proc in labels.items():
        values = set()
        for _, vals in by_proc.values():
            values.update(vals)
        if values:
            labeled_at[by_ts[ts].id] = tuple(values)
    problems = []
    unmatched: list = []
    for iid in witness:
        op = table[iid]
        if op.is_enqueue:
            unmatched.append(op.value)
        elif op.value is not None and op.value in unmatched:
            unmatched.remove(op.value)
        if iid in labeled_at:
            window = unmatched[:k]
            bad = [v for v in labeled_at[iid] if v not in window]
            if bad:
                problems.append(f"{iid} labeled {bad} outside the first {k} unmatched {window}")
    return problems


def latency_bounds(instances: list[InstanceRecord], d: int) -> list[str]:
    problems = []
    for i in instances:
        lat = i.response_time - i.invoke_time
        if lat > 2 * d:
            problems.append(f"{i.id} latency {lat} exceeds 2d={2 * d}")
        if i.is_fast and lat != 0:
            problems.append(f"fast {i.id} has latency {lat}")
    return problems


@dataclass
class Report:
    algorithm: str
    k: int
    instances: int
    witness: Verdict
    oracle: Optional[Verdict] = None
    fifo_on_relaxed: Optional[Verdict] = None
    problems: dict[str, list[str]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (
            self.witness.ok
            and (self.oracle is None or self.oracle.ok)
            and (self.fifo_on_relaxed is None or self.fifo_on_relaxed.ok)
            and not any(self.problems.values())
        )

    def failures(self) -> list[str]:
        out = []
        if not self.witness.ok:
            out.append(f"witness: {self.witness.clause} at {self.witness.index}: {self.witness.detail}")
        if self.oracle is not None and not self.oracle.ok:
            out.append(f"oracle: {self.oracle.detail}")
        if self.fifo_on_relaxed is not None and not self.fifo_on_relaxed.ok:
            out.append(f"fifo legality (k=1): {self.fifo_on_relaxed.detail}")
        for name, probs in self.problems.items():
            out.extend(f"{name}: {p}" for p in probs)
        return out


def verify_trace(trace: Trace, oracle_bound: int = lincheck.DEFAULT_BOUND) -> Report:
    algorithm = trace.config.get("algorithm", "fifo")
    k = int(trace.config.get("k", 1)) if algorithm == "relaxed" else 1
    instances = lincheck.extract_instances(trace)
    if algorithm == "fifo":
        witness_order = lincheck.construct_fifo_witness(instances)
    else:
        witness_order = lincheck.construct_relaxed_witness(instances)
    rt = lincheck.respects_real_time(witness_order, instances)
    witness = rt if not rt else lincheck.k_ooo_legal(witness_order, instances, k)
    report = Report(algorithm, k, len(instances), witness)
    if algorithm == "relaxed" and k == 1:
        report.fifo_on_relaxed = lincheck.fifo_legal(witness_order, instances)
    if len(instances) <= oracle_bound:
        report.oracle = lincheck.brute_force_linearizable(instances, k, bound=oracle_bound)
    has_messages = any(e.kind == "receive" for e in trace.events)
    report.problems["admissible"] = check_admissible(trace) if has_messages else []
    report.problems["local_exec_order"] = local_exec_order(trace)
    report.problems["convergence"] = replica_convergence(trace)
    report.problems["dequeue_agreement"] = dequeue_agreement(trace)
    if has_messages:
        report.problems["latency"] = latency_bounds(instances, measure_d(trace))
    if algorithm == "relaxed":
        report.problems["label_agreement"] = label_agreement(trace)
        report.problems["label_ownership"] = label_ownership(trace, instances)
        report.problems["label_safety"] = label_safety(trace, instances, witness_order, k)
    return report
