"""Vector timestamps and the two orders used to compare them.

Timestamps are plain tuples of ints so they hash, compare and serialize
without ceremony. Python's tuple ordering is already lexicographic with a
strict comparison at the first differing index.
"""

from __future__ import annotations

from typing import Sequence

from .errors import ConfigurationError

VectorTimestamp = tuple[int, ...]

LESS, EQUAL, GREATER = -1, 0, 1


def zero(n: int) -> VectorTimestamp:
    if n < 1:
        raise ConfigurationError(f"need at least one process, got n={n}")
    return (0,) * n


def tick(clock: Sequence[int], owner: int) -> VectorTimestamp:
    """Increment the owner's own component (an invocation event)."""
    if not 0 <= owner < len(clock):
        raise ConfigurationError(f"owner {owner} out of range for n={len(clock)}")
    out = list(clock)
    out[owner] += 1
    return tuple(out)


def merge(clock: Sequence[int], received: Sequence[int], owner: int) -> VectorTimestamp:
    """Receive event: bump own component, then take the componentwise max."""
    if len(clock) != len(received):
        raise ConfigurationError(
            f"timestamp length mismatch: {len(clock)} vs {len(received)}"
        )
    ticked = tick(clock, owner)
    return tuple(max(a, b) for a, b in zip(ticked, received))


def strictly_smaller(a: Sequence[int], b: Sequence[int]) -> bool:
    """Componentwise dominance of two unequal vectors; False when a == b."""
    if len(a) != len(b):
        raise ConfigurationError(f"timestamp length mismatch: {len(a)} vs {len(b)}")
    return tuple(a) != tuple(b) and all(x <= y for x, y in zip(a, b))


def lex_compare(a: Sequence[int], b: Sequence[int]) -> int:
    """Return LESS, EQUAL or GREATER by the first index where a and b differ."""
    if len(a) != len(b):
        raise ConfigurationError(f"timestamp length mismatch: {len(a)} vs {len(b)}")
    for x, y in zip(a, b):
        if x != y:
            return LESS if x < y else GREATER
    return EQUAL


def lex_less(a: Sequence[int], b: Sequence[int]) -> bool:
    return lex_compare(a, b) == LESS
