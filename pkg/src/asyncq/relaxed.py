"""Process state machine for the k-out-of-order queue.

Enqueue handling is inherited unchanged from ``FifoProcess``. A Dequeue is
fast when the invoker holds an element labeled for itself: it removes that
element and responds at once, then broadcasts the removal. Otherwise it is
slow: a full round trip, after which every process removes the oldest
unlabeled element and labels up to floor(k/n) more for the invoker.
"""

from __future__ import annotations

from typing import Optional

from .clock import VectorTimestamp
from .errors import ConfigurationError, ProtocolViolation
from .fifo import ConfirmationList, Envelope, FifoProcess, Response, Transition

DEQ_F = "Deq_f"
DEQ_S = "Deq_s"
DEQ_F_REQ = "DeqFReq"
DEQ_S_REQ = "DeqSReq"

LABEL_POLICIES = ("bounded", "unbounded")


class RelaxedProcess(FifoProcess):
    algorithm = "relaxed"
    request_kinds = (DEQ_F_REQ, DEQ_S_REQ)

    def __init__(self, pid: int, n: int, k: int, label_policy: str = "bounded") -> None:
        super().__init__(pid, n)
        if k < 1:
            raise ConfigurationError(f"relaxation bound k must be >= 1, got {k}")
        if label_policy not in LABEL_POLICIES:
            raise ConfigurationError(f"unknown label policy {label_policy!r}")
        self.k = k
        self.quota = k // n
        self.label_policy = label_policy

    def invoke_dequeue(self) -> Transition:
        ts = self._begin("dequeue")
        if self.lqueue.peek_by_label(self.id) is not None:
            entry = self.lqueue.deq_by_label(self.id)
            self.pending_invocation = None
            env = Envelope(DEQ_F_REQ, sender=self.id, ts=ts, value=entry.value, invoker=self.id, op=DEQ_F)
            return Transition(
                sends=self._broadcast(env),
                response=Response("dequeue", ts, entry.value, fast=True),
            )
        env = Envelope(DEQ_S_REQ, sender=self.id, ts=ts, invoker=self.id, op=DEQ_S)
        return Transition(sends=self._broadcast(env))

    on_deq_msg = FifoProcess.on_deq_req
    on_deq_ack_relaxed = FifoProcess.on_deq_ack

    def _execute(self, cl: ConfirmationList, out: Transition) -> None:
        if cl.op == DEQ_F:
            if cl.invoker != self.id and not self.lqueue.remove_value(cl.value):
                self.missed_removals += 1
            out.notes.append(
                {"kind": "local_exec", "op": "deq_f", "ts": cl.ts, "invoker": cl.invoker, "value": cl.value}
            )
            return
        if cl.op != DEQ_S:
            raise ProtocolViolation(f"p{self.id}: unexpected list op {cl.op!r}")
        entry = self.lqueue.deq_unlabeled_below(cl.ts)
        ret = entry.value if entry is not None else None
        out.notes.append({"kind": "local_exec", "op": "deq_s", "ts": cl.ts, "invoker": cl.invoker, "value": ret})
        labeled = self.label_elements(cl.invoker, cl.ts)
        out.notes.append({"kind": "label", "ts": cl.ts, "beneficiary": cl.invoker, "values": labeled})
        if cl.invoker == self.id:
            out.response = self._finish_dequeue(cl.ts, ret)

    def label_elements(self, beneficiary: int, deq_ts: Optional[VectorTimestamp] = None) -> list:
        """Label min(floor(k/n), available) oldest unlabeled entries for beneficiary.

        Under the "bounded" policy only entries older than the executing
        Dequeue's timestamp are eligible; "unbounded" considers the whole replica.
        """
        bound = deq_ts if self.label_policy == "bounded" else None
        x = min(self.quota, self.lqueue.unlabeled_size(bound))
        chosen = self.lqueue.label_oldest(beneficiary, x, bound)
        if self.lqueue.labeled_count(beneficiary) > self.quota:
            raise ProtocolViolation(
                f"p{self.id}: more than {self.quota} entries labeled for p{beneficiary}"
            )
        return [e.value for e in chosen]
