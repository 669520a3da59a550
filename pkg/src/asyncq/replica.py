"""Per-process replica of the shared queue.

Entries are kept in a list sorted by (timestamp, enqueuer). The enqueuer
tiebreak should never matter: distinct Enqueue instances always carry
distinct timestamps, and an equal timestamp on insert aborts the run.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Hashable, Iterator, Optional

from .clock import VectorTimestamp
from .errors import ProtocolViolation

Value = Hashable


@dataclass
class ReplicaEntry:
    value: Value
    enqueuer: int
    ts: VectorTimestamp
    label: Optional[int] = None

    @property
    def key(self) -> tuple:
        return (self.ts, self.enqueuer)

    def to_json(self) -> dict:
        value = list(self.value) if isinstance(self.value, tuple) else self.value
        return {"value": value, "enqueuer": self.enqueuer, "ts": list(self.ts), "label": self.label}


class LocalQueue:
    def __init__(self) -> None:
        self._entries: list[ReplicaEntry] = []
        self._by_value: dict[Value, ReplicaEntry] = {}
        self._by_ts: dict[VectorTimestamp, ReplicaEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[ReplicaEntry]:
        return iter(self._entries)

    def __contains__(self, value: Value) -> bool:
        return value in self._by_value

    def values(self) -> list[Value]:
        return [e.value for e in self._entries]

    def insert_by_ts(self, value: Value, enqueuer: int, ts: VectorTimestamp) -> ReplicaEntry:
        if ts in self._by_ts:
            raise ProtocolViolation(f"duplicate timestamp {ts} inserted into replica")
        if value in self._by_value:
            raise ProtocolViolation(f"duplicate value {value!r} inserted into replica")
        entry = ReplicaEntry(value, enqueuer, tuple(ts))
        bisect.insort(self._entries, entry, key=lambda e: e.key)
        self._by_value[value] = entry
        self._by_ts[entry.ts] = entry
        return entry

    def _remove(self, entry: ReplicaEntry) -> ReplicaEntry:
        i = bisect.bisect_left(self._entries, entry.key, key=lambda e: e.key)
        assert self._entries[i] is entry
        del self._entries[i]
        del self._by_value[entry.value]
        del self._by_ts[entry.ts]
        return entry

    def dequeue_min_below(self, bound: VectorTimestamp) -> Optional[ReplicaEntry]:
        """Remove the oldest entry whose timestamp is lexicographically below bound.

        Labels are ignored; the FIFO algorithm never sets them.
        """
        if self._entries and self._entries[0].ts < tuple(bound):
            return self._remove(self._entries[0])
        return None

    def peek_by_label(self, p: int) -> Optional[ReplicaEntry]:
        for e in self._entries:
            if e.label == p:
                return e
        return None

    def deq_by_label(self, p: int) -> ReplicaEntry:
        entry = self.peek_by_label(p)
        if entry is None:
            raise ProtocolViolation(f"deq_by_label({p}) with no entry labeled for {p}")
        return self._remove(entry)

    def deq_unlabeled_below(self, bound: VectorTimestamp) -> Optional[ReplicaEntry]:
        bound = tuple(bound)
        for e in self._entries:
            if e.ts >= bound:
                break
            if e.label is None:
                return self._remove(e)
        return None

    def remove_value(self, value: Value) -> bool:
        """Remove the entry holding value. Returns False (and changes nothing) if absent."""
        entry = self._by_value.get(value)
        if entry is None:
            return False
        self._remove(entry)
        return True

    def unlabeled_size(self, bound: Optional[VectorTimestamp] = None) -> int:
        """Count unlabeled entries, optionally only those with timestamp below bound."""
        return sum(
            1
            for e in self._entries
            if e.label is None and (bound is None or e.ts < tuple(bound))
        )

    def label_oldest(
        self, p: int, x: int, bound: Optional[VectorTimestamp] = None
    ) -> list[ReplicaEntry]:
        """Label the x oldest unlabeled entries for p and return them.

        With bound set only entries lexicographically below it are eligible.
        """
        eligible = [
            e
            for e in self._entries
            if e.label is None and (bound is None or e.ts < tuple(bound))
        ]
        if x > len(eligible):
            raise ProtocolViolation(
                f"label_oldest asked for {x} entries, only {len(eligible)} unlabeled"
            )
        chosen = eligible[:x]
        for e in chosen:
            e.label = p
        return chosen

    def labeled_count(self, p: int) -> int:
        return sum(1 for e in self._entries if e.label == p)

    def snapshot(self) -> list[dict]:
        return [e.to_json() for e in self._entries]
