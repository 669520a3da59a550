"""Run parameters: process count, algorithm, relaxation, delay model, seed."""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field
from typing import Optional

from .errors import ConfigurationError

ALGORITHMS = ("fifo", "relaxed")


@dataclass
class DelayRule:
    """Override delay for messages matching every non-None field."""

    delay: int
    src: Optional[int] = None
    dst: Optional[int] = None
    kind: Optional[str] = None

    def matches(self, src: int, dst: int, kind: str) -> bool:
        return (
            (self.src is None or self.src == src)
            and (self.dst is None or self.dst == dst)
            and (self.kind is None or self.kind == kind)
        )


@dataclass
class DelayModel:
    """Message delay in ticks.

    ``variant`` is "fixed" (always ``delta``) or "uniform" (integer in
    [lo, hi] drawn from the run's seeded RNG). Rules are checked first, in
    order; then self-messages use ``self_delay`` unless it is None, in which
    case they are treated like any other channel.
    """

    variant: str = "fixed"
    delta: int = 1
    lo: int = 1
    hi: int = 1
    self_delay: Optional[int] = 0
    rules: list[DelayRule] = field(default_factory=list)

    def validate(self) -> None:
        if self.variant not in ("fixed", "uniform"):
            raise ConfigurationError(f"unknown delay variant {self.variant!r}")
        if self.delta < 0 or self.lo < 0 or self.hi < self.lo:
            raise ConfigurationError(f"bad delay bounds in {self}")
        if self.self_delay is not None and self.self_delay < 0:
            raise ConfigurationError("self_delay must be >= 0")
        if any(r.delay < 0 for r in self.rules):
            raise ConfigurationError("rule delays must be >= 0")

    def delay(self, src: int, dst: int, kind: str, rng: random.Random) -> int:
        for rule in self.rules:
            if rule.matches(src, dst, kind):
                return rule.delay
        if src == dst and self.self_delay is not None:
            return self.self_delay
        if self.variant == "fixed":
            return self.delta
        return rng.randint(self.lo, self.hi)

    @classmethod
    def parse(cls, text: str, self_delay: Optional[int] = 0) -> "DelayModel":
        """Parse "fixed:D" or "uniform:LO:HI"."""
        parts = text.split(":")
        model = None
        try:
            if parts[0] == "fixed" and len(parts) == 2:
                model = cls("fixed", delta=int(parts[1]), self_delay=self_delay)
            elif parts[0] == "uniform" and len(parts) == 3:
                model = cls("uniform", lo=int(parts[1]), hi=int(parts[2]), self_delay=self_delay)
        except ValueError:
            pass
        if model is None:
            raise ConfigurationError(f"cannot parse delay spec {text!r}")
        model.validate()
        return model

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict | str) -> "DelayModel":
        if isinstance(d, str):
            return cls.parse(d)
        d = dict(d)
        rules = [DelayRule(**r) for r in d.pop("rules", [])]
        return cls(**d, rules=rules)


@dataclass
class RunConfig:
    n: int
    algorithm: str = "fifo"
    k: int = 1
    delay: DelayModel = field(default_factory=DelayModel)
    seed: int = 0
    label_policy: str = "bounded"
    record_messages: bool = True
    max_events: int = 5_000_000

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")
        self.delay.validate()

    @property
    def label_quota(self) -> int:
        return self.k // self.n

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        delay = DelayModel.from_dict(d.pop("delay", {}))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d, delay=delay)
