"""Guard-to-guard link control: connectivity rounds and power escalation.

Every guard runs a random connectivity timer t_c; on expiry it broadcasts a
connectivity frame and peers answer by unicast. Each reply's LQI is judged
against the configured threshold: a weak link bumps the guard's transmit
power one level up (never down), and every judged reply re-arms the timer.
In piggybacked mode the same judgement is also applied to probe replies a
guard receives from other guards, and those resets postpone the standalone
rounds, which is where the control-overhead saving comes from: a guard
falls back to its own connectivity round only when probe traffic has gone
quiet around it.
"""

from __future__ import annotations

from .channel import MessageKind, RadioConfig
from .engine import EventKind
from .protocol import Node, NodeStatus, reply_slot_delay


def draw_t_c(node: Node, ctx) -> float:
    lo, hi = ctx.config.t_c_range
    return lo + ctx.draw(node.id, "conn") * (hi - lo)


def escalate_power(node: Node, radio: RadioConfig) -> bool:
    """Raise tx power one configured level; saturates at the top level."""
    idx = radio.power_levels.index(node.tx_power)
    if idx + 1 >= len(radio.power_levels):
        return False
    node.tx_power = radio.power_levels[idx + 1]
    return True


def on_active_entered(node: Node, ctx) -> None:
    """New guard: arm the first connectivity timer (timer-driven modes only)."""
    if ctx.config.link_control.uses_conn_timer:
        node.conn_timer = ctx.schedule_event(draw_t_c(node, ctx), node.id,
                                             EventKind.CONN_TIMER_EXPIRED)


def on_conn_timer_expired(node: Node, ctx) -> None:
    """Broadcast a connectivity frame and arm a fallback timer.

    The fallback (t_w plus a fresh t_c) keeps a guard with no reachable
    peers cycling; any reply that does arrive replaces it via
    on_link_evidence.
    """
    if node.status is not NodeStatus.ACTIVE:
        return
    node.conn_timer = None
    if not ctx.config.link_control.uses_conn_timer:
        return
    ctx.send(node, MessageKind.CONN, None, 0.0)
    node.conn_timer = ctx.schedule_event(ctx.config.t_w + draw_t_c(node, ctx),
                                         node.id, EventKind.CONN_TIMER_EXPIRED)


def on_conn_received(node: Node, msg, ctx) -> None:
    """Guards answer connectivity frames by slot-staggered unicast; others ignore."""
    if node.status is not NodeStatus.ACTIVE:
        return
    delay = reply_slot_delay(node.id, ctx.config)
    ctx.send(node, MessageKind.CONN_REPLY, msg.sender, delay)


def on_link_evidence(node: Node, lqi: int, ctx) -> None:
    """Judge one measured reply: weak links escalate power; timer resets."""
    if node.status is not NodeStatus.ACTIVE:
        return
    if lqi < ctx.config.radio.lqi_threshold:
        escalate_power(node, ctx.config.radio)
    if ctx.config.link_control.uses_conn_timer:
        if node.conn_timer is not None:
            ctx.cancel_event(node.conn_timer)
        node.conn_timer = ctx.schedule_event(draw_t_c(node, ctx), node.id,
                                             EventKind.CONN_TIMER_EXPIRED)
