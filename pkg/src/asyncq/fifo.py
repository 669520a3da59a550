"""Process state machine for the linearizable replicated FIFO queue.

Every handler mutates the process and returns a ``Transition`` describing
what it wants done outside: envelopes to send, at most one user response,
and notes for the trace (local executions, labels). The simulator is the
only thing that moves envelopes around, so the machines can be driven by
hand in tests.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Optional

from . import clock as vc
from .clock import VectorTimestamp
from .errors import ConfigurationError, ProtocolViolation, UserContractViolation
from .replica import LocalQueue, Value

ENQ_REQ = "EnqReq"
ENQ_ACK = "EnqAck"
DEQ_REQ = "DeqReq"
DEQ_ACK = "DeqAck"

DEQ = "Deq"


@dataclass
class Envelope:
    kind: str
    sender: int
    ts: Optional[VectorTimestamp] = None
    value: Optional[Value] = None
    invoker: Optional[int] = None
    op: Optional[str] = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "sender": self.sender}
        if self.ts is not None:
            out["ts"] = list(self.ts)
        if self.value is not None:
            out["value"] = list(self.value) if isinstance(self.value, tuple) else self.value
        if self.invoker is not None:
            out["invoker"] = self.invoker
        if self.op is not None:
            out["op"] = self.op
        return out


@dataclass
class ConfirmationList:
    op: str
    ts: VectorTimestamp
    invoker: int
    responses: list[bool]
    value: Optional[Value] = None

    @property
    def full(self) -> bool:
        return all(self.responses)


@dataclass
class Response:
    op: str  # "enqueue" | "dequeue"
    ts: VectorTimestamp
    value: Optional[Value] = None
    fast: bool = False


@dataclass
class Transition:
    sends: list[tuple[int, Envelope]] = field(default_factory=list)
    response: Optional[Response] = None
    notes: list[dict] = field(default_factory=list)


def create_list(
    op: str, ts: VectorTimestamp, invoker: int, n: int, value: Optional[Value] = None
) -> ConfirmationList:
    responses = [False] * n
    responses[invoker] = True
    return ConfirmationList(op=op, ts=tuple(ts), invoker=invoker, responses=responses, value=value)


def insert_list(pending: list[ConfirmationList], cl: ConfirmationList) -> None:
    bisect.insort(pending, cl, key=lambda c: c.ts)


def propagate_earlier_responses(pending: list[ConfirmationList], ts: VectorTimestamp) -> None:
    """Copy every true bit from the list at ts down through all earlier lists.

    An acknowledgment for a later Dequeue implies the sender's clock has
    passed every earlier one, so those lists need not wait for it.
    """
    ts = tuple(ts)
    idx = bisect.bisect_left(pending, ts, key=lambda c: c.ts)
    if idx == len(pending) or pending[idx].ts != ts:
        raise ProtocolViolation(f"propagate from unknown timestamp {ts}")
    for k in range(idx, 0, -1):
        for j, bit in enumerate(pending[k].responses):
            if bit:
                pending[k - 1].responses[j] = True


class FifoProcess:
    algorithm = "fifo"

    def __init__(self, pid: int, n: int) -> None:
        if n < 1 or not 0 <= pid < n:
            raise ConfigurationError(f"process id {pid} invalid for n={n}")
        self.id = pid
        self.n = n
        self.clock: VectorTimestamp = vc.zero(n)
        self.lqueue = LocalQueue()
        self.pending_dequeues: list[ConfirmationList] = []
        self._lists: dict[VectorTimestamp, ConfirmationList] = {}
        # Timestamps of Dequeues already executed here. Messages about them
        # can still arrive (the last acks of a round) and must not recreate a list.
        self.executed: set[VectorTimestamp] = set()
        self.last_executed: Optional[VectorTimestamp] = None
        self.enq_response_count = 0
        self.pending_invocation: Optional[tuple[str, VectorTimestamp]] = None
        self.missed_removals = 0

    def __repr__(self) -> str:
        return f"{type(self).__name__}(id={self.id}, clock={self.clock})"

    # -- helpers -----------------------------------------------------------

    def _update_ts(self, received: Optional[VectorTimestamp] = None) -> VectorTimestamp:
        if received is None:
            self.clock = vc.tick(self.clock, self.id)
        else:
            self.clock = vc.merge(self.clock, received, self.id)
        return self.clock

    def _broadcast(self, env: Envelope) -> list[tuple[int, Envelope]]:
        return [(dst, env) for dst in range(self.n)]

    def _begin(self, kind: str) -> VectorTimestamp:
        if self.pending_invocation is not None:
            raise UserContractViolation(
                f"p{self.id}: {kind} invoked while {self.pending_invocation[0]} is pending"
            )
        ts = self._update_ts()
        self.pending_invocation = (kind, ts)
        return ts

    def _ensure_list(self, op: str, ts: VectorTimestamp, invoker: int, value=None) -> Optional[ConfirmationList]:
        ts = tuple(ts)
        if ts in self.executed:
            return None
        cl = self._lists.get(ts)
        if cl is None:
            cl = create_list(op, ts, invoker, self.n, value)
            insert_list(self.pending_dequeues, cl)
            self._lists[ts] = cl
        return cl

    # -- Enqueue -----------------------------------------------------------

    def invoke_enqueue(self, value: Value) -> Transition:
        ts = self._begin("enqueue")
        self.enq_response_count = 0
        env = Envelope(ENQ_REQ, sender=self.id, ts=ts, value=value, invoker=self.id)
        return Transition(sends=self._broadcast(env))

    def on_enq_req(self, env: Envelope) -> Transition:
        self._update_ts(env.ts)
        self.lqueue.insert_by_ts(env.value, env.invoker, env.ts)
        note = {"kind": "local_exec", "op": "enq", "ts": env.ts, "invoker": env.invoker, "value": env.value}
        ack = Envelope(ENQ_ACK, sender=self.id)
        return Transition(sends=[(env.invoker, ack)], notes=[note])

    def on_enq_ack(self, env: Envelope) -> Transition:
        if self.pending_invocation is None or self.pending_invocation[0] != "enqueue":
            raise ProtocolViolation(f"p{self.id}: EnqAck from p{env.sender} with no pending Enqueue")
        self.enq_response_count += 1
        if self.enq_response_count > self.n:
            raise ProtocolViolation(f"p{self.id}: more than n EnqAcks")
        if self.enq_response_count == self.n:
            _, ts = self.pending_invocation
            self.pending_invocation = None
            return Transition(response=Response("enqueue", ts))
        return Transition()

    # -- Dequeue -----------------------------------------------------------

    def invoke_dequeue(self) -> Transition:
        ts = self._begin("dequeue")
        env = Envelope(DEQ_REQ, sender=self.id, ts=ts, invoker=self.id, op=DEQ)
        return Transition(sends=self._broadcast(env))

    def _ack_for(self, env: Envelope) -> Envelope:
        return Envelope(DEQ_ACK, sender=self.id, ts=env.ts, invoker=env.invoker, op=env.op, value=env.value)

    def on_deq_req(self, env: Envelope) -> Transition:
        self._update_ts(env.ts)
        self._ensure_list(env.op or DEQ, env.ts, env.invoker, env.value)
        return Transition(sends=self._broadcast(self._ack_for(env)))

    def on_deq_ack(self, env: Envelope) -> Transition:
        cl = self._ensure_list(env.op or DEQ, env.ts, env.invoker, env.value)
        if cl is None:
            return Transition()
        cl.responses[env.sender] = True
        propagate_earlier_responses(self.pending_dequeues, cl.ts)
        self._check_full_prefix()
        out = Transition()
        for cl in [c for c in self.pending_dequeues if c.full]:
            self._delete_list(cl)
            self._mark_executed(cl.ts)
            self._execute(cl, out)
        return out

    def _check_full_prefix(self) -> None:
        seen_partial = False
        for c in self.pending_dequeues:
            if not c.full:
                seen_partial = True
            elif seen_partial:
                raise ProtocolViolation(
                    f"p{self.id}: list {c.ts} is full while an earlier list is not"
                )

    def _delete_list(self, cl: ConfirmationList) -> None:
        self.pending_dequeues.remove(cl)
        del self._lists[cl.ts]

    def _mark_executed(self, ts: VectorTimestamp) -> None:
        if self.last_executed is not None and not ts > self.last_executed:
            raise ProtocolViolation(
                f"p{self.id}: executing Dequeue {ts} after {self.last_executed}"
            )
        self.last_executed = ts
        self.executed.add(ts)

    def _execute(self, cl: ConfirmationList, out: Transition) -> None:
        entry = self.lqueue.dequeue_min_below(cl.ts)
        ret = entry.value if entry is not None else None
        out.notes.append({"kind": "local_exec", "op": "deq", "ts": cl.ts, "invoker": cl.invoker, "value": ret})
        if cl.invoker == self.id:
            out.response = self._finish_dequeue(cl.ts, ret)

    def _finish_dequeue(self, ts: VectorTimestamp, ret: Optional[Value]) -> Response:
        if self.pending_invocation != ("dequeue", ts):
            raise ProtocolViolation(f"p{self.id}: executed own Dequeue {ts} that is not pending")
        self.pending_invocation = None
        return Response("dequeue", ts, ret)

    # -- dispatch ----------------------------------------------------------

    def receive(self, env: Envelope) -> Transition:
        handler = {
            ENQ_REQ: self.on_enq_req,
            ENQ_ACK: self.on_enq_ack,
            DEQ_ACK: self.on_deq_ack,
        }.get(env.kind)
        if handler is None:
            if env.kind in self.request_kinds:
                handler = self.on_deq_req
            else:
                raise ProtocolViolation(f"p{self.id}: unknown message kind {env.kind!r}")
        return handler(env)

    request_kinds = (DEQ_REQ,)
