"""Per-node sleep/probe/guard state machine.

A reserve node sleeps for a Weibull-distributed time, wakes into PROBE,
broadcasts a probe, and waits t_w. Hearing a guard's reply sends it back to
sleep with a fresh draw; silence promotes it to ACTIVE, where it stands
guard until failure. ACTIVE is absorbing: there is no demotion path.

Handlers are sans-IO: they mutate the node and talk to a context object
(`ctx`) for time, configuration, randomness, timers, and transmissions, so
they run identically under the real simulation or a test double. The ctx
surface used here: now, config, draw(node_id, stream),
schedule_event(delay, target, kind), cancel_event(handle), send(node, kind,
addressee, delay), touch_energy(node), note_transition(node, old, new),
on_became_active(node).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .channel import MessageKind
from .energy import EnergyLedger
from .engine import EventKind
from .weibull import WeibullParams, sample_sleep_time, update_probe_rate


class NodeStatus(Enum):
    SLEEP = "SLEEP"
    PROBE = "PROBE"
    ACTIVE = "ACTIVE"
    DEAD = "DEAD"


ALLOWED_TRANSITIONS = frozenset({
    (NodeStatus.SLEEP, NodeStatus.PROBE),
    (NodeStatus.PROBE, NodeStatus.SLEEP),
    (NodeStatus.PROBE, NodeStatus.ACTIVE),
    (NodeStatus.SLEEP, NodeStatus.DEAD),
    (NodeStatus.PROBE, NodeStatus.DEAD),
    (NodeStatus.ACTIVE, NodeStatus.DEAD),
})


class ProtocolViolationError(RuntimeError):
    """A handler ran in a status its contract forbids."""


def reply_slot_delay(node_id: int, config) -> float:
    """Deterministic reply stagger: each node owns a slot inside t_w.

    Repliers share the probe-delivery instant, so id-keyed slots keep their
    frames disjoint unless ids clash modulo the slot count; the reply still
    lands before the prober's wait window closes (slots + 2 frames <= t_w).
    """
    frame = config.radio.tx_duration_s
    width = 1.05 * frame
    slots = max(1, int((config.t_w - 2.0 * frame) / width))
    return (node_id % slots) * width


@dataclass
class Node:
    id: int
    x: float
    y: float
    deploy_weibull: WeibullParams
    tx_power: float
    weibull: WeibullParams = None  # current sampling params, post-updates
    status: NodeStatus = NodeStatus.SLEEP
    rcv_msg: bool = False
    deployed_at: float = 0.0
    sleep_cycle_start: float = 0.0
    sleep_timer: Optional[object] = None
    wait_timer: Optional[object] = None
    conn_timer: Optional[object] = None
    ledger: EnergyLedger = field(default_factory=EnergyLedger)
    accrued_until: float = 0.0
    died_at: Optional[float] = None

    def __post_init__(self):
        if self.weibull is None:
            self.weibull = self.deploy_weibull

    @property
    def alive(self) -> bool:
        return self.status is not NodeStatus.DEAD

    @property
    def awake(self) -> bool:
        return self.status in (NodeStatus.PROBE, NodeStatus.ACTIVE)


def set_status(node: Node, new: NodeStatus, ctx) -> None:
    old = node.status
    if (old, new) not in ALLOWED_TRANSITIONS:
        raise ProtocolViolationError(f"node {node.id}: {old.value} -> {new.value}")
    ctx.touch_energy(node)
    node.status = new
    ctx.note_transition(node, old, new)


def on_deploy(node: Node, ctx) -> None:
    """Freshly created node: sleep for a Weibull time, then wake to probe."""
    if node.status is not NodeStatus.SLEEP or node.sleep_timer is not None:
        raise ProtocolViolationError(f"node {node.id} already deployed")
    node.deployed_at = ctx.now
    node.sleep_cycle_start = ctx.now
    t_s = sample_sleep_time(node.weibull, ctx.draw(node.id, "sleep"))
    node.sleep_timer = ctx.schedule_event(t_s, node.id, EventKind.SLEEP_EXPIRED)


def on_sleep_expired(node: Node, ctx) -> None:
    """Wake up: broadcast a probe and wait t_w for a standing guard."""
    if node.status is NodeStatus.DEAD:
        return
    if node.status is not NodeStatus.SLEEP:
        raise ProtocolViolationError(
            f"sleep timer fired for node {node.id} in {node.status.value}")
    node.sleep_timer = None
    set_status(node, NodeStatus.PROBE, ctx)
    node.rcv_msg = False
    ctx.send(node, MessageKind.PROBE, None, 0.0)
    node.wait_timer = ctx.schedule_event(ctx.config.t_w, node.id,
                                         EventKind.WAIT_EXPIRED)


def on_probe_received(node: Node, msg, ctx) -> None:
    """Guards answer probes with a slot-staggered unicast reply; others ignore."""
    if node.status is not NodeStatus.ACTIVE:
        return
    delay = reply_slot_delay(node.id, ctx.config)
    ctx.send(node, MessageKind.PROBE_REPLY, msg.sender, delay)


def on_probe_reply_received(node: Node, msg, lqi: int, ctx) -> None:
    """Record that a guard answered; resolution waits for t_w expiry.

    Replies reaching a node that is itself already a guard are link-quality
    evidence, not probe answers; the simulation routes those to link_control.
    """
    if node.status is NodeStatus.PROBE:
        node.rcv_msg = True


def on_wait_expired(node: Node, ctx) -> None:
    """Resolve the probe: back to sleep if a guard answered, else stand guard."""
    if node.status is NodeStatus.DEAD:
        return
    if node.status is not NodeStatus.PROBE:
        raise ProtocolViolationError(
            f"wait timer fired for node {node.id} in {node.status.value}")
    node.wait_timer = None
    if node.rcv_msg:
        feedback = ctx.config.hazard_feedback
        if feedback == "global":
            node.weibull = update_probe_rate(node.deploy_weibull,
                                             ctx.now - node.deployed_at)
        elif feedback == "cycle":
            node.weibull = update_probe_rate(node.deploy_weibull,
                                             ctx.now - node.sleep_cycle_start)
        set_status(node, NodeStatus.SLEEP, ctx)
        node.sleep_cycle_start = ctx.now
        t_s = sample_sleep_time(node.weibull, ctx.draw(node.id, "sleep"))
        node.sleep_timer = ctx.schedule_event(t_s, node.id,
                                              EventKind.SLEEP_EXPIRED)
    else:
        set_status(node, NodeStatus.ACTIVE, ctx)
        ctx.on_became_active(node)


def mark_dead(node: Node, ctx) -> None:
    """Fail-stop: cancel pending timers and leave the protocol permanently."""
    if node.status is NodeStatus.DEAD:
        return
    set_status(node, NodeStatus.DEAD, ctx)
    node.died_at = ctx.now
    for attr in ("sleep_timer", "wait_timer", "conn_timer"):
        handle = getattr(node, attr)
        if handle is not None:
            ctx.cancel_event(handle)
            setattr(node, attr, None)
