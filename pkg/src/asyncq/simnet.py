"""Deterministic discrete-event simulation of the asynchronous model.

Channels are reliable, exactly-once and FIFO per ordered pair of processes
(including each process's channel to itself). A message whose sampled delay
would let it overtake its channel predecessor is held until the
predecessor is delivered. Time is integer ticks. Simultaneous events are
processed in (time, process, receive-before-invoke, sender, channel_seq)
order, so a fixed (config, seed, workload) always yields the same trace.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

from .config import DelayModel, DelayRule, RunConfig
from .errors import ConfigurationError, ProtocolViolation
from .fifo import Envelope, FifoProcess, Response, Transition
from .relaxed import RelaxedProcess
from .workload import ENQUEUE, Step, validate

log = logging.getLogger(__name__)

RECEIVE, INVOKE = 0, 1


def _jsonable(x: Any) -> Any:
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    if isinstance(x, list):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


def _tupled(x: Any) -> Any:
    if isinstance(x, list):
        return tuple(_tupled(v) for v in x)
    return x


@dataclass
class TraceEvent:
    sim_time: int
    process: int
    kind: str  # invoke | respond | send | receive | local_exec | label
    op: Optional[str] = None
    value: Any = None
    ts: Optional[tuple] = None
    instance: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"sim_time": self.sim_time, "process": self.process, "kind": self.kind}
        for name in ("op", "value", "ts", "instance"):
            v = getattr(self, name)
            if v is not None:
                out[name] = _jsonable(v)
        if self.extra:
            out.update(_jsonable(self.extra))
        return out

    @classmethod
    def from_json(cls, d: dict) -> "TraceEvent":
        d = dict(d)
        d.pop("type", None)
        base = {k: d.pop(k) for k in ("sim_time", "process", "kind")}
        op = d.pop("op", None)
        value = d.pop("value", None)
        if base["kind"] == "label" and value is not None:
            value = [_tupled(v) for v in value]
        else:
            value = _tupled(value)
        ts = d.pop("ts", None)
        return cls(
            **base,
            op=op,
            value=value,
            ts=tuple(ts) if ts is not None else None,
            instance=d.pop("instance", None),
            extra=d,
        )


@dataclass
class Trace:
    config: dict
    events: list[TraceEvent]
    snapshots: dict[int, list] = field(default_factory=dict)
    missed_removals: dict[int, int] = field(default_factory=dict)

    def lines(self) -> Iterable[str]:
        yield json.dumps({"type": "header", "config": self.config}, sort_keys=True)
        for e in self.events:
            yield json.dumps({"type": "event", **e.to_json()}, sort_keys=True)
        yield json.dumps(
            {
                "type": "final",
                "snapshots": {str(p): s for p, s in sorted(self.snapshots.items())},
                "missed_removals": {str(p): c for p, c in sorted(self.missed_removals.items())},
            },
            sort_keys=True,
        )

    def to_jsonl(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def parse(cls, text: str) -> "Trace":
        config: dict = {}
        events = []
        snapshots: dict[int, list] = {}
        missed: dict[int, int] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.get("type")
            if kind == "header":
                config = rec["config"]
            elif kind == "event":
                events.append(TraceEvent.from_json(rec))
            elif kind == "final":
                snapshots = {int(p): s for p, s in rec.get("snapshots", {}).items()}
                missed = {int(p): c for p, c in rec.get("missed_removals", {}).items()}
            else:
                raise ValueError(f"line {lineno}: unknown record type {kind!r}")
        return cls(config, events, snapshots, missed)

    @classmethod
    def read(cls, path: str | Path) -> "Trace":
        return cls.parse(Path(path).read_text())

    @property
    def n(self) -> int:
        return int(self.config["n"])


@dataclass(order=True)
class ScheduledDelivery:
    deliver_at: int
    dst: int
    priority: int
    src: int
    channel_seq: int
    envelope: Envelope = field(compare=False)
    send_time: int = field(compare=False, default=0)


def make_process(config: RunConfig, pid: int) -> FifoProcess:
    if config.algorithm == "fifo":
        return FifoProcess(pid, config.n)
    if config.algorithm == "relaxed":
        return RelaxedProcess(pid, config.n, config.k, config.label_policy)
    raise ConfigurationError(f"unknown algorithm {config.algorithm!r}")


class Simulation:
    def __init__(self, config: RunConfig, steps: list[Step]) -> None:
        config.validate()
        validate(steps, config.n)
        self.config = config
        self.steps = steps
        self.n = config.n
        self.rng = random.Random(config.seed)
        self.procs = [make_process(config, p) for p in range(self.n)]
        self.now = 0
        self.events: list[TraceEvent] = []
        self._heap: list = []
        self._serial = 0
        self._chan_seq: dict[tuple[int, int], int] = {}
        self._chan_last: dict[tuple[int, int], int] = {}
        self._queues: list[list[int]] = [[] for _ in range(self.n)]
        for i, s in enumerate(steps):
            self._queues[s.process].append(i)
        self._cursor = [0] * self.n
        self._busy: list[Optional[int]] = [None] * self.n
        self._last_response = [0] * self.n
        self._responded = [False] * len(steps)
        self._low_water = 0  # every step index below this has responded
        self._parked: set[int] = set()
        self._enq_seq = [0] * self.n
        self._instance_of_ts: dict[tuple, str] = {}
        self._instance_count = [0] * self.n

    # -- scheduling --------------------------------------------------------

    def _push(self, time: int, process: int, priority: int, src: int, seq: int, payload) -> None:
        self._serial += 1
        heapq.heappush(self._heap, (time, process, priority, src, seq, self._serial, payload))

    def _schedule_next(self, p: int) -> None:
        if self._busy[p] is not None or self._cursor[p] >= len(self._queues[p]):
            return
        idx = self._queues[p][self._cursor[p]]
        step = self.steps[idx]
        if step.barrier and self._low_water < idx:
            self._parked.add(p)
            return
        self._parked.discard(p)
        self._cursor[p] += 1
        self._busy[p] = idx
        when = max(self.now, step.at, self._last_response[p] + step.after)
        self._push(when, p, INVOKE, p, 0, idx)

    def _send(self, src: int, dst: int, env: Envelope) -> None:
        chan = (src, dst)
        seq = self._chan_seq.get(chan, 0)
        self._chan_seq[chan] = seq + 1
        delay = self.config.delay.delay(src, dst, env.kind, self.rng)
        deliver = max(self.now + delay, self._chan_last.get(chan, 0))
        self._chan_last[chan] = deliver
        item = ScheduledDelivery(deliver, dst, RECEIVE, src, seq, env, self.now)
        if self.config.record_messages:
            self._record(src, "send", extra={"msg": self._wire(item)})
        self._push(deliver, dst, RECEIVE, src, seq, item)

    @staticmethod
    def _wire(item: ScheduledDelivery) -> dict:
        return {
            **item.envelope.to_json(),
            "dst": item.dst,
            "send_time": item.send_time,
            "recv_time": item.deliver_at,
            "channel_seq": item.channel_seq,
        }

    def _record(self, process: int, kind: str, **kw) -> None:
        self.events.append(TraceEvent(self.now, process, kind, **kw))

    # -- applying transitions ----------------------------------------------

    def _apply(self, p: int, tr: Transition) -> None:
        for note in tr.notes:
            note = dict(note)
            kind = note.pop("kind")
            ts = tuple(note.pop("ts"))
            inst = self._instance_of_ts.get(ts)
            if kind == "label":
                self._record(p, "label", value=note.pop("values"), ts=ts, instance=inst, extra=note)
            else:
                self._record(p, "local_exec", op=note.pop("op"), value=note.pop("value"), ts=ts,
                             instance=inst, extra=note)
        for dst, env in tr.sends:
            self._send(p, dst, env)
        if tr.response is not None:
            self._respond(p, tr.response)

    def _respond(self, p: int, resp: Response) -> None:
        idx = self._busy[p]
        if idx is None:
            raise ProtocolViolation(f"p{p} responded with no pending step")
        inst = self._instance_of_ts[tuple(resp.ts)]
        extra = {"fast": True} if resp.fast else {}
        self._record(p, "respond", op=resp.op, value=resp.value, ts=resp.ts, instance=inst, extra=extra)
        self._busy[p] = None
        self._responded[idx] = True
        self._last_response[p] = self.now
        while self._low_water < len(self._responded) and self._responded[self._low_water]:
            self._low_water += 1
        self._schedule_next(p)
        for q in sorted(self._parked):
            self._schedule_next(q)

    def _invoke(self, p: int, idx: int) -> None:
        step = self.steps[idx]
        proc = self.procs[p]
        iid = f"p{p}.{self._instance_count[p]}"
        self._instance_count[p] += 1
        if step.op == ENQUEUE:
            value = (p, self._enq_seq[p])
            self._enq_seq[p] += 1
            tr = proc.invoke_enqueue(value)
        else:
            value = None
            tr = proc.invoke_dequeue()
        ts = proc.clock
        if ts in self._instance_of_ts:
            raise ProtocolViolation(f"two instances share timestamp {ts}")
        self._instance_of_ts[ts] = iid
        self._record(p, "invoke", op=step.op, value=value, ts=ts, instance=iid)
        self._apply(p, tr)

    # -- main loop ---------------------------------------------------------

    def run(self) -> Trace:
        for p in range(self.n):
            self._schedule_next(p)
        count = 0
        while self._heap:
            count += 1
            if count > self.config.max_events:
                raise ProtocolViolation(f"no quiescence after {self.config.max_events} events")
            time, p, prio, _src, _seq, _serial, payload = heapq.heappop(self._heap)
            self.now = time
            if prio == INVOKE:
                self._invoke(p, payload)
            else:
                if self.config.record_messages:
                    self._record(p, "receive", extra={"msg": self._wire(payload)})
                self._apply(p, self.procs[p].receive(payload.envelope))
        if not all(self._responded):
            missing = [i for i, r in enumerate(self._responded) if not r]
            raise ProtocolViolation(f"quiescent with unanswered steps {missing[:5]}")
        for proc in self.procs:
            if proc.pending_dequeues:
                raise ProtocolViolation(f"p{proc.id} quiescent with pending lists")
        return Trace(
            config=self.config.to_dict(),
            events=self.events,
            snapshots={p.id: p.lqueue.snapshot() for p in self.procs},
            missed_removals={p.id: p.missed_removals for p in self.procs},
        )


def run(config: RunConfig, workload: list[Step]) -> Trace:
    return Simulation(config, workload).run()


def message_delays(trace: Trace, include_self: bool = True) -> list[int]:
    out = []
    for e in trace.events:
        if e.kind != "receive":
            continue
        msg = e.extra["msg"]
        if not include_self and msg["sender"] == msg["dst"]:
            continue
        out.append(msg["recv_time"] - msg["send_time"])
    return out


def measure_d(trace: Trace, include_self: bool = True) -> int:
    """Longest send-to-receive time of any delivered message in the trace."""
    delays = message_delays(trace, include_self)
    if not delays:
        log.warning("trace has no delivered messages; d reported as 0")
        return 0
    return max(delays)


def check_admissible(trace: Trace) -> list[str]:
    """Return a list of admissibility problems (empty list means admissible)."""
    problems = []
    sent: dict[tuple, dict] = {}
    received: dict[tuple, int] = {}
    last_seq: dict[tuple, int] = {}
    for e in trace.events:
        if e.kind not in ("send", "receive"):
            continue
        msg = e.extra["msg"]
        key = (msg["sender"], msg["dst"], msg["channel_seq"])
        if e.kind == "send":
            if key in sent:
                problems.append(f"message {key} sent twice")
            sent[key] = msg
        else:
            if key not in sent:
                problems.append(f"message {key} received but never sent")
            received[key] = received.get(key, 0) + 1
            chan = key[:2]
            if key[2] != last_seq.get(chan, -1) + 1:
                problems.append(f"channel {chan} delivered seq {key[2]} out of order")
            last_seq[chan] = key[2]
            if e.sim_time != msg["recv_time"] or msg["recv_time"] < msg["send_time"]:
                problems.append(f"message {key} has inconsistent timing")
    for key in sent:
        if received.get(key, 0) != 1:
            problems.append(f"message {key} delivered {received.get(key, 0)} times")
    outstanding: dict[int, Optional[str]] = {}
    for e in trace.events:
        if e.kind == "invoke":
            if outstanding.get(e.process):
                problems.append(f"p{e.process} invoked {e.instance} while {outstanding[e.process]} pending")
            outstanding[e.process] = e.instance
        elif e.kind == "respond":
            if outstanding.get(e.process) != e.instance:
                problems.append(f"p{e.process} responded for {e.instance} which is not pending")
            outstanding[e.process] = None
    for p, inst in outstanding.items():
        if inst:
            problems.append(f"p{p} never responded to {inst}")
    return problems


def adversarial_schedules(n: int, seed: int = 0) -> dict[str, DelayModel]:
    """Delay models aimed at the reorder-sensitive paths of both algorithms."""
    rng = random.Random(f"adversarial-{n}-{seed}")
    last = n - 1
    schedules = {
        # the invoker hears its own request last
        "late_self": DelayModel("uniform", lo=1, hi=3, self_delay=12),
        # requests crawl, acks race: acks overtake unrelated requests on other channels
        "req_slow_ack_fast": DelayModel(
            "fixed", delta=1, self_delay=0,
            rules=[DelayRule(6, kind=k) for k in ("EnqReq", "DeqReq", "DeqFReq", "DeqSReq")],
        ),
        # p0 -> p(n-1) is slow, so with n >= 3 third-party DeqAcks reach p(n-1) before p0's request
        "ack_first": DelayModel("fixed", delta=1, self_delay=0, rules=[DelayRule(10, src=0, dst=last)]),
        # every edge gets its own fixed delay, widely spread
        "skewed_edges": DelayModel(
            "fixed", delta=1, self_delay=rng.randint(0, 6),
            rules=[DelayRule(rng.choice([1, 2, 9, 17]), src=s, dst=t)
                   for s in range(n) for t in range(n) if s != t],
        ),
        # one process is slow to be heard from; others keep executing around it
        "slow_sender": DelayModel("uniform", lo=1, hi=2, self_delay=0, rules=[DelayRule(9, src=0, dst=t) for t in range(1, n)]),
        "wide_uniform": DelayModel("uniform", lo=0, hi=25, self_delay=None),
    }
    return schedules
