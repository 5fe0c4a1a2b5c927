"""Full simulation wiring: nodes, channel, protocol callbacks, outputs.

One Simulation owns one run. It implements the context surface the protocol
and link-control handlers expect (time, randomness, timers, transmissions,
energy touches) and routes every dispatched event to the right handler, so
all node behaviour is serialized through the engine's event loop.
"""

from __future__ import annotations

import os
import time as _wall
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import channel as chan
from . import energy as energy_mod
from . import link_control
from . import metrics as metrics_mod
from . import protocol
from .config import RunConfig
from .engine import RNG_NAME, Engine, Event, EventKind
from .metrics import NodeView, Snapshot
from .protocol import Node, NodeStatus


@dataclass
class RunResult:
    config: RunConfig
    nodes: dict[int, Node]
    rows: list[dict]
    summary: dict
    snapshot: Snapshot
    failure_log: list[dict] = field(default_factory=list)


class Simulation:
    def __init__(self, config: RunConfig, transition_hook=None,
                 post_event_hook=None, positions: Optional[dict] = None):
        """``positions`` pins node placement (id -> (x, y)) for scenario
        construction; by default nodes deploy uniformly at random."""
        self.config = config
        self.engine = Engine(config.seed, handler=self._dispatch)
        self.transition_hook = transition_hook
        self.post_event_hook = post_event_hook
        self.frames: list[chan.Frame] = []
        self.counters = {kind: 0 for kind in chan.MessageKind}
        self.rows: list[dict] = []
        self.failure_log: list[dict] = []
        self._sigma = config.radio.shadowing_sigma_db
        self._coverage_cache: tuple = (None, 0.0)
        self._component_cache: tuple = (None, None)

        deploy = self.engine.rng(None, "deploy")
        self.nodes: dict[int, Node] = {}
        initial_power = config.radio.power_levels[0]
        for nid in range(config.node_count):
            x = float(deploy.random()) * config.field_width
            y = float(deploy.random()) * config.field_height
            if positions is not None:
                x, y = positions[nid]
            self.nodes[nid] = Node(id=nid, x=x, y=y,
                                   deploy_weibull=config.weibull,
                                   tx_power=initial_power)
        self.engine.known_nodes = set(self.nodes)
        self._xs = np.array([self.nodes[i].x for i in range(config.node_count)])
        self._ys = np.array([self.nodes[i].y for i in range(config.node_count)])
        self._alive = np.ones(config.node_count, dtype=bool)
        self._awake_ids: set[int] = set()
        self._guard_ids: set[int] = set()
        for node in self.nodes.values():
            protocol.on_deploy(node, self)
        self._schedule_sample(0)

    # -- context surface used by protocol/link_control ---------------------

    @property
    def now(self) -> float:
        return self.engine.clock

    def draw(self, node_id: int, stream: str) -> float:
        return self.engine.uniform(node_id, stream)

    def schedule_event(self, delay: float, target: Optional[int],
                       kind: EventKind, payload=None) -> Event:
        return self.engine.schedule(self.now + delay, target, kind, payload)

    def cancel_event(self, handle: Event) -> bool:
        return self.engine.cancel(handle)

    def send(self, node: Node, kind: chan.MessageKind,
             addressee: Optional[int], delay: float) -> None:
        self.schedule_event(delay, node.id, EventKind.TX_START,
                            payload=(kind, addressee))

    def touch_energy(self, node: Node) -> None:
        dt = self.now - node.accrued_until
        if dt > 0.0:
            energy_mod.accrue(node.ledger, self.config.energy, node.status, dt)
        node.accrued_until = self.now

    def note_transition(self, node: Node, old: NodeStatus, new: NodeStatus) -> None:
        if new is NodeStatus.DEAD:
            self._alive[node.id] = False
        if new in (NodeStatus.PROBE, NodeStatus.ACTIVE):
            self._awake_ids.add(node.id)
        else:
            self._awake_ids.discard(node.id)
        if new is NodeStatus.ACTIVE:
            self._guard_ids.add(node.id)
        else:
            self._guard_ids.discard(node.id)
        if self.transition_hook is not None:
            self.transition_hook(self, node, old, new)

    def on_became_active(self, node: Node) -> None:
        link_control.on_active_entered(node, self)

    # -- failure injection --------------------------------------------------

    def inject_failure(self, node_id: int, at: float) -> Event:
        return self.engine.inject_failure(node_id, at)

    def inject_sentinel_failure(self, at: float, count: Optional[int] = None) -> Event:
        """Kill the `count` lowest-id guards at `at` (all guards when None)."""
        return self.engine.schedule(at, None, EventKind.NODE_FAILURE,
                                    payload={"count": count})

    # -- event routing ------------------------------------------------------

    def _dispatch(self, ev: Event) -> None:
        kind = ev.kind
        if kind is EventKind.SLEEP_EXPIRED:
            protocol.on_sleep_expired(self.nodes[ev.target], self)
        elif kind is EventKind.WAIT_EXPIRED:
            protocol.on_wait_expired(self.nodes[ev.target], self)
        elif kind is EventKind.CONN_TIMER_EXPIRED:
            link_control.on_conn_timer_expired(self.nodes[ev.target], self)
        elif kind is EventKind.TX_START:
            msg_kind, addressee = ev.payload
            self._transmit(self.nodes[ev.target], msg_kind, addressee)
        elif kind is EventKind.MSG_DELIVERY:
            self._resolve_frame(ev.payload)
        elif kind is EventKind.NODE_FAILURE:
            self._handle_failure(ev)
        elif kind is EventKind.METRIC_SAMPLE:
            self._sample_metrics(ev.payload)
        if self.post_event_hook is not None:
            self.post_event_hook(self, ev)

    # -- radio --------------------------------------------------------------

    def _transmit(self, node: Node, kind: chan.MessageKind,
                  addressee: Optional[int]) -> None:
        if not node.alive:
            return  # fail-stop: queued transmissions die with the node
        msg = chan.Message(kind=kind, sender=node.id, addressee=addressee,
                           tx_power_dbm=node.tx_power, tx_time=self.now)
        self.counters[kind] += 1
        energy_mod.add_tx(node.ledger, self.config.energy, node.tx_power,
                          self.config.radio.tx_duration_s)
        shadow = None
        if self._sigma > 0.0:
            # one fresh per-receiver draw per transmission, from the
            # sender's substream so draw indices stay node-count stable
            gen = self.engine.rng(node.id, "shadow")
            shadow = gen.normal(0.0, self._sigma, size=len(self.nodes))
        frame = chan.make_frame(msg, self._xs, self._ys, self._alive,
                                self._awake_ids, self.config.radio, shadow)
        self.frames.append(frame)
        self.engine.schedule(frame.end, None, EventKind.MSG_DELIVERY, payload=frame)

    def _link_evidence_lqi(self, frame: chan.Frame, rid: int) -> int:
        """Link quality normalized to the base power level.

        Replies carry their transmit power, so the receiver can judge the
        path itself rather than the momentary reception; otherwise a guard
        that escalated first would mask the weak link from its peer and the
        pair would never converge to a working power pair.
        """
        radio = self.config.radio
        normalized = (frame.rx_dbm[rid] - frame.msg.tx_power_dbm
                      + radio.power_levels[0])
        return chan.compute_lqi(radio, normalized)

    def _resolve_frame(self, frame: chan.Frame) -> None:
        radio = self.config.radio
        awake_now = self._awake_ids
        mode = self.config.link_control
        for rid, lqi in chan.deliver(frame, self.frames, awake_now, radio):
            node = self.nodes[rid]
            kind = frame.msg.kind
            if kind is chan.MessageKind.PROBE:
                protocol.on_probe_received(node, frame.msg, self)
            elif kind is chan.MessageKind.PROBE_REPLY:
                if node.status is NodeStatus.PROBE:
                    protocol.on_probe_reply_received(node, frame.msg, lqi, self)
                elif node.status is NodeStatus.ACTIVE and mode.uses_piggyback:
                    # a reply landing on a node that already stood guard is
                    # guard-to-guard link evidence, not a probe answer
                    link_control.on_link_evidence(
                        node, self._link_evidence_lqi(frame, rid), self)
            elif kind is chan.MessageKind.CONN:
                link_control.on_conn_received(node, frame.msg, self)
            elif kind is chan.MessageKind.CONN_REPLY:
                link_control.on_link_evidence(
                    node, self._link_evidence_lqi(frame, rid), self)
        if frame.msg.kind is chan.MessageKind.PROBE_REPLY and mode.uses_piggyback:
            guards = self._guard_ids
            for rid, _lqi in chan.overhearers(frame, self.frames, guards, radio):
                link_control.on_link_evidence(
                    self.nodes[rid], self._link_evidence_lqi(frame, rid), self)
        horizon = self.now - radio.tx_duration_s
        self.frames = [f for f in self.frames if f.end > horizon]

    # -- failures -----------------------------------------------------------

    def _handle_failure(self, ev: Event) -> None:
        if ev.target is not None:
            node = self.nodes[ev.target]
            killed = [node.id] if node.alive else []
            protocol.mark_dead(node, self)
            self.failure_log.append({"time": self.now, "kind": "node",
                                     "requested": 1, "killed": killed})
            return
        count = (ev.payload or {}).get("count")
        guards = sorted(n.id for n in self.nodes.values()
                        if n.status is NodeStatus.ACTIVE)
        victims = guards if count is None else guards[:count]
        for nid in victims:
            protocol.mark_dead(self.nodes[nid], self)
        self.failure_log.append({
            "time": self.now, "kind": "sentinels",
            "requested": count if count is not None else "all",
            "killed": victims,
            "clamped": bool(count is not None and count > len(guards)),
        })

    # -- metrics ------------------------------------------------------------

    def _schedule_sample(self, index: int) -> None:
        at = index * self.config.metric_interval
        if at <= self.config.duration:
            self.engine.schedule(at, None, EventKind.METRIC_SAMPLE, payload=index)

    def snapshot(self) -> Snapshot:
        views = tuple(NodeView(id=n.id, x=n.x, y=n.y, status=n.status.value,
                               tx_dbm=n.tx_power, energy_j=n.ledger.total_j)
                      for n in self.nodes.values())
        counters = {k.value: v for k, v in self.counters.items()}
        return Snapshot(time=self.now, field_width=self.config.field_width,
                        field_height=self.config.field_height,
                        nodes=views, counters=counters)

    def _sample_metrics(self, index: int) -> None:
        for node in self.nodes.values():
            self.touch_energy(node)
        snap = self.snapshot()
        census = {status: 0 for status in NodeStatus}
        for node in self.nodes.values():
            census[node.status] += 1
        # guard set and powers change rarely; reuse derived metrics when
        # the inputs they depend on are unchanged since the last sample
        guard_key = tuple((n.id, n.tx_power) for n in self.nodes.values()
                          if n.status is NodeStatus.ACTIVE)
        cov_key = tuple(nid for nid, _ in guard_key)
        if self._coverage_cache[0] != cov_key:
            cov = metrics_mod.coverage_fraction(
                snap, self.config.sensing_range, self.config.grid_step)
            self._coverage_cache = (cov_key, cov)
        if self._component_cache[0] != guard_key:
            self._component_cache = (
                guard_key, metrics_mod.sentinel_components(snap, self.config.radio))
        comps = self._component_cache[1]
        totals = energy_mod.summarize(n.ledger for n in self.nodes.values())
        self.rows.append({
            "time_s": self.now,
            "n_sleep": census[NodeStatus.SLEEP],
            "n_probe": census[NodeStatus.PROBE],
            "n_active": census[NodeStatus.ACTIVE],
            "n_dead": census[NodeStatus.DEAD],
            "coverage": self._coverage_cache[1],
            "components": comps["component_count"],
            "isolated": comps["isolated_count"],
            "msgs_probe": self.counters[chan.MessageKind.PROBE],
            "msgs_probe_reply": self.counters[chan.MessageKind.PROBE_REPLY],
            "msgs_conn": self.counters[chan.MessageKind.CONN],
            "msgs_conn_reply": self.counters[chan.MessageKind.CONN_REPLY],
            "energy_total_j": totals["total_j"],
            "energy_mean_j": totals["mean_per_node_j"],
        })
        self._schedule_sample(index + 1)

    # -- run ----------------------------------------------------------------

    def run(self) -> RunResult:
        started = _wall.perf_counter()
        engine_summary = self.engine.run_until(self.config.duration)
        for node in self.nodes.values():
            self.touch_energy(node)
        wall = _wall.perf_counter() - started
        snap = self.snapshot()
        totals = energy_mod.summarize(n.ledger for n in self.nodes.values())
        final_row = self.rows[-1] if self.rows else None
        summary = {
            "meta": self._meta_dict(),
            "seed": self.config.seed,
            "config": self.config.to_flat(),
            "totals": {
                "energy": totals,
                "messages": {k.value: v for k, v in self.counters.items()},
                "events": engine_summary.as_dict()["dispatched"],
                "census": {s.value: sum(1 for n in self.nodes.values()
                                        if n.status is s) for s in NodeStatus},
                "coverage_final": final_row["coverage"] if final_row else None,
                "components_final": final_row["components"] if final_row else None,
                "isolated_final": final_row["isolated"] if final_row else None,
            },
            "failures": self.failure_log,
            "runtime_wall_s": wall,
        }
        return RunResult(config=self.config, nodes=self.nodes, rows=self.rows,
                         summary=summary, snapshot=snap,
                         failure_log=self.failure_log)

    def _meta_dict(self) -> dict:
        return {"seed": self.config.seed, "config": self.config.config_hash(),
                "rng": RNG_NAME}


def healing_report(rows: list[dict], failure_log: list[dict],
                   epsilon: float = 0.05) -> list[dict]:
    """Per failure: time until coverage returns to within epsilon of the
    last pre-failure sample."""
    report = []
    for failure in failure_log:
        t_fail = failure["time"]
        before = [r for r in rows if r["time_s"] < t_fail]
        pre = before[-1]["coverage"] if before else 0.0
        recovered_at = None
        for row in rows:
            if row["time_s"] > t_fail and row["coverage"] >= pre - epsilon:
                recovered_at = row["time_s"]
                break
        entry = dict(failure)
        entry["pre_coverage"] = pre
        entry["recovered_at"] = recovered_at
        entry["recovery_time"] = (None if recovered_at is None
                                  else recovered_at - t_fail)
        report.append(entry)
    return report


def run_simulation(config: RunConfig, failures=(),
                   sentinel_failures=()) -> RunResult:
    """Build, fault-inject, and run one simulation to completion.

    ``failures``: iterable of (node_id, time); ``sentinel_failures``:
    iterable of (time, count-or-None).
    """
    sim = Simulation(config)
    for node_id, at in failures:
        sim.inject_failure(node_id, at)
    for at, count in sentinel_failures:
        sim.inject_sentinel_failure(at, count)
    return sim.run()


def write_outputs(result: RunResult, out_dir, healing_epsilon: Optional[float] = None) -> dict:
    """Write metrics.csv, snapshot.json, summary.json, config.txt (and
    healing.json when fault injection ran). Returns the path map."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = result.config
    meta = metrics_mod.meta_line(cfg.seed, cfg.config_hash(), RNG_NAME)
    meta_dict = {"seed": cfg.seed, "config": cfg.config_hash(), "rng": RNG_NAME}
    paths = {
        "metrics": os.path.join(out_dir, "metrics.csv"),
        "snapshot": os.path.join(out_dir, "snapshot.json"),
        "summary": os.path.join(out_dir, "summary.json"),
        "config": os.path.join(out_dir, "config.txt"),
    }
    metrics_mod.write_metrics_csv(paths["metrics"], result.rows, meta)
    metrics_mod.write_json(paths["snapshot"],
                           metrics_mod.snapshot_document(result.snapshot, meta_dict))
    metrics_mod.write_json(paths["summary"], result.summary)
    metrics_mod.write_config_echo(paths["config"], cfg, meta)
    if result.failure_log or healing_epsilon is not None:
        eps = 0.05 if healing_epsilon is None else healing_epsilon
        paths["healing"] = os.path.join(out_dir, "healing.json")
        metrics_mod.write_json(paths["healing"], {
            "meta": meta_dict, "epsilon": eps,
            "failures": healing_report(result.rows, result.failure_log, eps),
        })
    return paths
