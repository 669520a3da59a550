"""Linearizability verdicts for queue histories.

Two routes to the same question: the explicit witness orders (timestamp
order for the FIFO algorithm, timestamp order plus real-time placement of
fast Dequeues for the relaxed one), and an exhaustive search over
real-time-respecting orders for small histories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .errors import ProtocolViolation
from .simnet import Trace

ENQUEUE = "Enqueue"
DEQUEUE_SLOW = "DequeueSlow"
DEQUEUE_FAST = "DequeueFast"


@dataclass(frozen=True)
class InstanceRecord:
    id: str
    kind: str
    value: Any  # Enqueue argument or Dequeue return; None is the empty marker
    ts: tuple
    invoke_time: int
    response_time: int
    process: int
    # position of the invoke/respond events in the trace; orders events that
    # share a tick (a closed-loop client invokes in the tick its last op returned)
    invoke_seq: int = 0
    response_seq: int = 0

    @property
    def invoked_at(self) -> tuple[int, int]:
        return (self.invoke_time, self.invoke_seq)

    @property
    def responded_at(self) -> tuple[int, int]:
        return (self.response_time, self.response_seq)

    def precedes(self, other: "InstanceRecord") -> bool:
        """Real-time order: self responds before other is invoked."""
        return self.responded_at < other.invoked_at

    @property
    def is_enqueue(self) -> bool:
        return self.kind == ENQUEUE

    @property
    def is_fast(self) -> bool:
        return self.kind == DEQUEUE_FAST

    def to_json(self) -> dict:
        value = list(self.value) if isinstance(self.value, tuple) else self.value
        return {"id": self.id, "kind": self.kind, "value": value, "ts": list(self.ts),
                "invoke_time": self.invoke_time, "response_time": self.response_time,
                "process": self.process, "invoke_seq": self.invoke_seq,
                "response_seq": self.response_seq}


@dataclass
class Verdict:
    ok: bool
    witness: Optional[list[str]] = None
    index: Optional[int] = None
    clause: Optional[str] = None
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        out: dict = {"ok": self.ok}
        if self.witness is not None:
            out["witness"] = self.witness
        if not self.ok:
            out["violation"] = {"index": self.index, "clause": self.clause, "detail": self.detail}
        out.update(self.extra)
        return out


def extract_instances(trace: Trace) -> list[InstanceRecord]:
    invokes = {}
    out = []
    for pos, e in enumerate(trace.events):
        if e.kind == "invoke":
            invokes[e.instance] = (pos, e)
        elif e.kind == "respond":
            inv_pos, inv = invokes.pop(e.instance)
            if inv.op == "enqueue":
                kind, value = ENQUEUE, inv.value
            else:
                kind = DEQUEUE_FAST if e.extra.get("fast") else DEQUEUE_SLOW
                value = e.value
            out.append(InstanceRecord(e.instance, kind, value, tuple(inv.ts), inv.sim_time, e.sim_time,
                                      e.process, inv_pos, pos))
    if invokes:
        raise ProtocolViolation(f"instances without responses: {sorted(invokes)}")
    return out


# -- legality ----------------------------------------------------------------

def _by_id(instances: Sequence[InstanceRecord]) -> dict[str, InstanceRecord]:
    return {i.id: i for i in instances}


def k_ooo_legal(seq: Sequence[str], instances: Sequence[InstanceRecord], k: int) -> Verdict:
    """Check a total order against the k-out-of-order queue; k=1 is the FIFO queue.

    Clause numbers: (1) Enqueue, (2) Dequeue returning a value must match one
    of the first k unmatched Enqueues, (3) Dequeue returning empty needs
    fewer than k unmatched Enqueues.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    table = _by_id(instances)
    unmatched: list = []  # Enqueue arguments in linearization order
    for idx, iid in enumerate(seq):
        op = table[iid]
        if op.is_enqueue:
            unmatched.append(op.value)
        elif op.value is None:
            if len(unmatched) >= k:
                return Verdict(False, list(seq), idx, "(3)",
                               f"{iid} returned empty with {len(unmatched)} unmatched Enqueues")
        else:
            window = unmatched[:k]
            if op.value not in window:
                where = "not enqueued yet" if op.value not in unmatched else \
                    f"position {unmatched.index(op.value) + 1} among unmatched"
                return Verdict(False, list(seq), idx, "(2)", f"{iid} returned {op.value!r}: {where}")
            unmatched.remove(op.value)
    return Verdict(True, list(seq))


def fifo_legal(seq: Sequence[str], instances: Sequence[InstanceRecord]) -> Verdict:
    return k_ooo_legal(seq, instances, 1)


def respects_real_time(seq: Sequence[str], instances: Sequence[InstanceRecord]) -> Verdict:
    """Every instance that responds before another is invoked must precede it."""
    table = _by_id(instances)
    if sorted(seq) != sorted(table):
        return Verdict(False, list(seq), None, "permutation", "order is not a permutation of the instances")
    # op is misplaced iff something after it in seq responded before op was invoked
    ops = [table[i] for i in seq]
    inf = (float("inf"), 0)
    suffix_min_resp = [inf] * (len(ops) + 1)
    for i in range(len(ops) - 1, -1, -1):
        suffix_min_resp[i] = min(ops[i].responded_at, suffix_min_resp[i + 1])
    for i, op in enumerate(ops):
        if suffix_min_resp[i + 1] < op.invoked_at:
            later = next(o for o in ops[i + 1:] if o.precedes(op))
            return Verdict(False, list(seq), i, "real-time",
                           f"{later.id} responds at {later.response_time} before {op.id} "
                           f"is invoked at {op.invoke_time} but is ordered after it")
    return Verdict(True, list(seq))


# -- witnesses ---------------------------------------------------------------

def _ts_order(instances: Sequence[InstanceRecord]) -> list[InstanceRecord]:
    ordered = sorted(instances, key=lambda i: i.ts)
    for a, b in zip(ordered, ordered[1:]):
        if a.ts == b.ts:
            raise ProtocolViolation(f"{a.id} and {b.id} share timestamp {a.ts}")
    return ordered


def construct_fifo_witness(instances: Sequence[InstanceRecord]) -> list[str]:
    return [i.id for i in _ts_order(instances)]


def construct_relaxed_witness(instances: Sequence[InstanceRecord]) -> list[str]:
    """Timestamp order of Enqueues and slow Dequeues, then fast Dequeues spliced in.

    Fast Dequeues are taken in real-time invocation order (ties by process)
    and each is placed immediately after the later of: the last slow
    instance responding before its invocation, and the last already-placed
    fast Dequeue responding before its invocation.
    """
    slow = _ts_order([i for i in instances if not i.is_fast])
    fast = sorted((i for i in instances if i.is_fast), key=lambda i: (i.invoked_at, i.process, i.ts))
    order: list[InstanceRecord] = list(slow)
    placed_fast: set[str] = set()
    for op in fast:
        anchor = -1
        for pos, other in enumerate(order):
            if other.precedes(op) and (not other.is_fast or other.id in placed_fast):
                anchor = pos
        order.insert(anchor + 1, op)
        placed_fast.add(op.id)
    return [i.id for i in order]


def check_witness(trace_or_instances, algorithm: str, k: int = 1) -> Verdict:
    instances = (extract_instances(trace_or_instances) if isinstance(trace_or_instances, Trace)
                 else list(trace_or_instances))
    if algorithm == "fifo":
        witness = construct_fifo_witness(instances)
    else:
        witness = construct_relaxed_witness(instances)
    rt = respects_real_time(witness, instances)
    if not rt:
        return rt
    return k_ooo_legal(witness, instances, k if algorithm == "relaxed" else 1)


# -- brute force -------------------------------------------------------------

DEFAULT_BOUND = 8


class TooLarge(ValueError):
    pass


def brute_force_linearizable(instances: Sequence[InstanceRecord], k: int = 1,
                             bound: int = DEFAULT_BOUND) -> Verdict:
    """Depth-first search for a legal order that respects real time.

    An instance may come next only if no unplaced instance responded before
    it was invoked. States are memoized on (placed set, unmatched queue).
    """
    if len(instances) > bound:
        raise TooLarge(f"{len(instances)} instances exceed brute-force bound {bound}")
    ops = list(instances)
    m = len(ops)
    # must_precede[j] = bitmask of instances that respond before j is invoked
    must_precede = [0] * m
    for j, b in enumerate(ops):
        for i, a in enumerate(ops):
            if a.precedes(b):
                must_precede[j] |= 1 << i
    full = (1 << m) - 1
    dead: set[tuple[int, tuple]] = set()
    path: list[int] = []

    def search(placed: int, unmatched: tuple) -> bool:
        if placed == full:
            return True
        state = (placed, unmatched)
        if state in dead:
            return False
        for j in range(m):
            if placed >> j & 1 or must_precede[j] & ~placed:
                continue
            op = ops[j]
            if op.is_enqueue:
                nxt = unmatched + (op.value,)
            elif op.value is None:
                if len(unmatched) >= k:
                    continue
                nxt = unmatched
            else:
                window = unmatched[:k]
                if op.value not in window:
                    continue
                pos = window.index(op.value)
                nxt = unmatched[:pos] + unmatched[pos + 1:]
            path.append(j)
            if search(placed | 1 << j, nxt):
                return True
            path.pop()
        dead.add(state)
        return False

    if search(0, ()):
        return Verdict(True, [ops[j].id for j in path])
    return Verdict(False, None, None, "no-linearization", f"no legal order for k={k} respects real time")
