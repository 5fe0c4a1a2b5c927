"""Deterministic discrete-event core.

A single heap-backed queue dispatches events in nondecreasing time order,
breaking ties FIFO by insertion sequence. All randomness flows through
counter-based Philox substreams keyed by (seed, node id, stream name), so a
node's draws depend only on its own draw indices and adding more nodes never
perturbs existing streams.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

RNG_NAME = "philox"

# Stable substream indices; also used for draws not owned by any node.
_STREAMS = {"sleep": 0, "jitter": 1, "conn": 2, "shadow": 3, "deploy": 4}
_SYSTEM_NODE = 0xFFFFFFFF


class EventKind(Enum):
    SLEEP_EXPIRED = "sleep_expired"
    WAIT_EXPIRED = "wait_expired"
    CONN_TIMER_EXPIRED = "conn_timer_expired"
    TX_START = "tx_start"
    MSG_DELIVERY = "msg_delivery"
    NODE_FAILURE = "node_failure"
    METRIC_SAMPLE = "metric_sample"


class ClockViolationError(ValueError):
    """Raised when an event is scheduled before the current clock."""


@dataclass(order=True)
class Event:
    time: float
    seq: int
    target: Optional[int] = field(compare=False)  # None = system-wide
    kind: EventKind = field(compare=False)
    payload: Any = field(compare=False, default=None)
    cancelled: bool = field(compare=False, default=False)
    dispatched: bool = field(compare=False, default=False)


@dataclass
class RunSummary:
    clock: float
    dispatched: Counter

    def as_dict(self) -> dict:
        return {"clock": self.clock,
                "dispatched": {k.value: v for k, v in sorted(
                    self.dispatched.items(), key=lambda kv: kv[0].value)}}


class Engine:
    """Event queue, simulation clock, and seeded RNG substreams."""

    def __init__(self, seed: int, handler=None):
        self.seed = int(seed)
        self.clock = 0.0
        self.handler = handler  # callable(event) set by the simulation
        self._queue: list[Event] = []
        self._next_seq = 0
        self._rngs: dict[tuple[int, int], np.random.Generator] = {}
        self._counts: Counter = Counter()
        self.known_nodes: set[int] = set()

    # -- randomness -------------------------------------------------------

    def rng(self, node_id: Optional[int], stream: str) -> np.random.Generator:
        key = (_SYSTEM_NODE if node_id is None else int(node_id), _STREAMS[stream])
        gen = self._rngs.get(key)
        if gen is None:
            seq = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
            gen = np.random.Generator(np.random.Philox(seq))
            self._rngs[key] = gen
        return gen

    def uniform(self, node_id: Optional[int], stream: str) -> float:
        """Uniform draw strictly inside (0, 1); endpoint draws are retried."""
        gen = self.rng(node_id, stream)
        u = float(gen.random())
        while u == 0.0:
            u = float(gen.random())
        return u

    # -- queue ------------------------------------------------------------

    def schedule(self, time: float, target: Optional[int], kind: EventKind,
                 payload: Any = None) -> Event:
        if time < self.clock:
            raise ClockViolationError(
                f"cannot schedule {kind.value} at {time} behind clock {self.clock}")
        ev = Event(time=time, seq=self._next_seq, target=target, kind=kind,
                   payload=payload)
        self._next_seq += 1
        heapq.heappush(self._queue, ev)
        return ev

    def cancel(self, event: Event) -> bool:
        if event.cancelled or event.dispatched:
            return False
        event.cancelled = True
        return True

    def inject_failure(self, node_id: int, time: float) -> Event:
        if node_id not in self.known_nodes:
            raise ValueError(f"unknown node id {node_id}")
        return self.schedule(time, node_id, EventKind.NODE_FAILURE)

    def run_until(self, t_end: float) -> RunSummary:
        if t_end < self.clock:
            raise ClockViolationError(
                f"cannot run to {t_end} behind clock {self.clock}")
        while self._queue and self._queue[0].time <= t_end:
            ev = heapq.heappop(self._queue)
            if ev.cancelled:
                continue
            self.clock = ev.time
            ev.dispatched = True
            self._counts[ev.kind] += 1
            if self.handler is not None:
                self.handler(ev)
        self.clock = t_end
        return RunSummary(clock=self.clock, dispatched=Counter(self._counts))

    def pending(self) -> int:
        return sum(1 for ev in self._queue if not ev.cancelled)
