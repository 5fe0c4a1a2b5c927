"""Radio channel: log-distance path loss, LQI mapping, collision-aware delivery.

Frames occupy the air for a fixed duration; any time overlap between two
audible frames at a receiver destroys both receptions there (no capture
effect). Senders are half-duplex: a node transmitting during a frame's
interval cannot receive it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

MIN_DISTANCE_M = 0.01  # co-located nodes are clamped to 1 cm


class MessageKind(Enum):
    PROBE = "probe"
    PROBE_REPLY = "probe_reply"
    CONN = "conn"
    CONN_REPLY = "conn_reply"


# Replies are unicast, everything else is broadcast.
UNICAST_KINDS = frozenset({MessageKind.PROBE_REPLY, MessageKind.CONN_REPLY})


@dataclass(frozen=True)
class RadioConfig:
    power_levels: tuple[float, ...] = (-10.0, -5.0)  # dBm, ascending
    path_loss_exponent: float = 2.4
    reference_loss_db: float = 55.0  # at d0 = 1 m
    shadowing_sigma_db: float = 4.0
    noise_floor_dbm: float = -100.0
    sensitivity_dbm: float = -95.0
    lqi_threshold: int = 7
    lqi_snr_min_db: float = 0.0
    lqi_snr_max_db: float = 20.0
    tx_duration_s: float = 0.004

    def __post_init__(self):
        if len(self.power_levels) < 1:
            raise ValueError("at least one transmit power level is required")
        if any(b <= a for a, b in zip(self.power_levels, self.power_levels[1:])):
            raise ValueError(f"power_levels must be strictly increasing: {self.power_levels}")
        if self.sensitivity_dbm < self.noise_floor_dbm:
            raise ValueError("sensitivity must be at or above the noise floor")
        if self.lqi_snr_min_db >= self.lqi_snr_max_db:
            raise ValueError("lqi_snr_min_db must be below lqi_snr_max_db")
        if self.tx_duration_s <= 0.0:
            raise ValueError("tx_duration_s must be positive")


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    sender: int
    addressee: Optional[int]  # None = broadcast
    tx_power_dbm: float
    tx_time: float

    def __post_init__(self):
        if self.kind in UNICAST_KINDS and self.addressee is None:
            raise ValueError(f"{self.kind.value} frames must be unicast")
        if self.kind not in UNICAST_KINDS and self.addressee is not None:
            raise ValueError(f"{self.kind.value} frames must be broadcast")


def rx_power_dbm(radio: RadioConfig, tx_power: float, distance: float,
                 shadowing_db: float = 0.0) -> float:
    """Received power under log-distance path loss plus a shadowing term."""
    d = max(distance, MIN_DISTANCE_M)
    loss = radio.reference_loss_db + 10.0 * radio.path_loss_exponent * math.log10(d)
    return tx_power - (loss + shadowing_db)


def compute_lqi(radio: RadioConfig, rx_dbm: float) -> int:
    """Map SNR above the noise floor onto the 0..10 link-quality scale."""
    snr = rx_dbm - radio.noise_floor_dbm
    span = radio.lqi_snr_max_db - radio.lqi_snr_min_db
    frac = (snr - radio.lqi_snr_min_db) / span
    frac = min(max(frac, 0.0), 1.0)
    # round half away from zero so the scale is language-neutral
    return int(math.floor(10.0 * frac + 0.5))


@dataclass
class Frame:
    """One transmission on the air: message plus per-receiver power map."""

    msg: Message
    start: float
    end: float
    rx_dbm: dict[int, float] = field(default_factory=dict)
    awake_at_start: frozenset[int] = frozenset()

    def overlaps(self, other: "Frame") -> bool:
        return self.start < other.end and other.start < self.end

    def audible_at(self, node_id: int, radio: RadioConfig) -> bool:
        if self.msg.sender == node_id:
            return True  # half-duplex: own transmission blocks reception
        rx = self.rx_dbm.get(node_id)
        return rx is not None and rx >= radio.sensitivity_dbm


def make_frame(msg: Message, xs, ys, alive, awake_ids,
               radio: RadioConfig, shadow=None) -> Frame:
    """Compute the frame's received power across the field.

    ``xs``/``ys`` are position arrays indexed by node id, ``alive`` a boolean
    mask, ``shadow`` an optional per-receiver dB array (one fresh draw per
    transmission). Receivers below sensitivity are omitted from the power
    map; they can neither decode the frame nor disturb anyone else.
    """
    d = np.hypot(xs - xs[msg.sender], ys - ys[msg.sender])
    np.maximum(d, MIN_DISTANCE_M, out=d)
    rx = msg.tx_power_dbm - (radio.reference_loss_db
                             + 10.0 * radio.path_loss_exponent * np.log10(d))
    if shadow is not None:
        rx = rx - shadow
    audible = (rx >= radio.sensitivity_dbm) & alive
    audible[msg.sender] = False
    rx_map = {int(i): float(rx[i]) for i in np.flatnonzero(audible)}
    return Frame(msg=msg, start=msg.tx_time, end=msg.tx_time + radio.tx_duration_s,
                 rx_dbm=rx_map, awake_at_start=frozenset(awake_ids))


def _receivable(frame: Frame, node_id: int, in_flight, radio: RadioConfig) -> bool:
    rx = frame.rx_dbm.get(node_id)
    if rx is None or rx < radio.sensitivity_dbm:
        return False
    for other in in_flight:
        if other is frame:
            continue
        if frame.overlaps(other) and other.audible_at(node_id, radio):
            return False
    return True


def deliver(frame: Frame, in_flight, awake_now, radio: RadioConfig) -> list[tuple[int, int]]:
    """Resolve a frame at its end time; returns (receiver id, lqi) successes.

    Candidate receivers are every node awake for the whole frame (broadcast)
    or the addressee alone (unicast). A reception succeeds when the frame is
    above sensitivity and nothing else audible overlapped it at that node.
    """
    msg = frame.msg
    if msg.addressee is None:
        candidates = sorted(frame.awake_at_start & frozenset(awake_now))
    else:
        candidates = [msg.addressee] if (
            msg.addressee in frame.awake_at_start and msg.addressee in awake_now
        ) else []
    received = []
    for nid in candidates:
        if nid == msg.sender:
            continue
        if _receivable(frame, nid, in_flight, radio):
            received.append((nid, compute_lqi(radio, frame.rx_dbm[nid])))
    return received


def overhearers(frame: Frame, in_flight, listener_ids, radio: RadioConfig) -> list[tuple[int, int]]:
    """Receptions of a unicast frame at awake third parties (same rules)."""
    msg = frame.msg
    result = []
    for nid in sorted(listener_ids):
        if nid == msg.sender or nid == msg.addressee:
            continue
        if nid not in frame.awake_at_start:
            continue
        if _receivable(frame, nid, in_flight, radio):
            result.append((nid, compute_lqi(radio, frame.rx_dbm[nid])))
    return result
