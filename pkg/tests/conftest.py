import dataclasses

import pytest

from sentinet.config import RunConfig
from sentinet.engine import EventKind


class FakeHandle:
    def __init__(self, delay, target, kind):
        self.delay = delay
        self.target = target
        self.kind = kind


class FakeCtx:
    """Stand-in for the simulation context so handlers run without an engine."""

    def __init__(self, config=None, now=0.0, u=0.5):
        self.config = config or RunConfig()
        self.now = now
        self.u = u
        self.scheduled = []
        self.cancelled = []
        self.sent = []
        self.transitions = []
        self.activated = []

    def draw(self, node_id, stream):
        return self.u

    def schedule_event(self, delay, target, kind, payload=None):
        handle = FakeHandle(delay, target, kind)
        self.scheduled.append(handle)
        return handle

    def cancel_event(self, handle):
        self.cancelled.append(handle)
        return True

    def send(self, node, kind, addressee, delay):
        self.sent.append((node.id, kind, addressee, delay))

    def touch_energy(self, node):
        pass

    def note_transition(self, node, old, new):
        self.transitions.append((node.id, old, new))

    def on_became_active(self, node):
        from sentinet import link_control
        self.activated.append(node.id)
        link_control.on_active_entered(node, self)

    def of_kind(self, kind):
        return [h for h in self.scheduled if h.kind is kind]


@pytest.fixture
def ctx():
    return FakeCtx()


def zero_shadow(config: RunConfig) -> RunConfig:
    return dataclasses.replace(
        config, radio=dataclasses.replace(config.radio, shadowing_sigma_db=0.0))
