"""Packet-level emulation of one cellular path.

The link is a timestamp-driven state machine: callers feed it parameter
changes and packets with non-decreasing timestamps and collect egress events.
It has no clock of its own, which makes it equally usable under a virtual
clock (deterministic, faster than real time) and a wall clock (live relay).

Pipeline per packet, in fixed order:

  1. loss draw      — dropped with probability loss_rate (seeded RNG)
  2. queue admission — tail-drop when queued bytes would exceed capacity
  3. rate shaping   — FIFO serializer; a packet departs the shaper at
                      max(arrival, previous departure) + size*8/rate, and
                      queued packets drain at whatever rate is current
  4. delay line     — departure + base_delay + uniform(-jitter, +jitter),
                      clamped so release never precedes the departure
  5. ordering guard — release times are monotone, the link never reorders

Queuing delay is emergent: a rate dip with continued offered load backs up
the queue, which is exactly the effect delay correction targets.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import TimeRegression
from .model import Scenario, ScenarioRow

UNLIMITED = float("inf")


@dataclass(frozen=True)
class LinkParams:
    """Instantaneous shaping configuration of one emulated path."""

    rate_bps: float
    base_delay_ms: float = 0.0
    jitter_ms: float = 0.0
    loss_rate: float = 0.0

    def __post_init__(self):
        if self.rate_bps < 0:
            raise ValueError(f"rate_bps must be >= 0, got {self.rate_bps}")
        if self.base_delay_ms < 0:
            raise ValueError(f"base_delay_ms must be >= 0, got {self.base_delay_ms}")
        if self.jitter_ms < 0:
            raise ValueError(f"jitter_ms must be >= 0, got {self.jitter_ms}")
        if not 0.0 <= self.loss_rate <= 1.0:
            raise ValueError(f"loss_rate must be in [0, 1], got {self.loss_rate}")


IDENTITY = LinkParams(rate_bps=UNLIMITED)


@dataclass(frozen=True)
class Packet:
    seq: int
    size_bytes: int
    ingress_ts_ms: float
    payload: bytes = b""

    def __post_init__(self):
        if self.size_bytes < 1:
            raise ValueError("size_bytes must be >= 1")


@dataclass(frozen=True)
class EgressEvent:
    packet: Packet
    egress_ts_ms: float
    dropped: bool = False
    drop_reason: str | None = None  # "loss_draw" | "queue_full"


@dataclass(frozen=True)
class LinkConfig:
    """Static link configuration.

    queue_capacity_bytes / bucket_depth_bytes of None mean "derive from the
    current rate": capacity is 500 ms worth of bytes (floor 10 MTU) so that
    congestion shows up as delay before it shows up as loss, and bucket depth
    is max(MTU, 10 ms of bytes).
    """

    mtu_bytes: int = 1500
    rng_seed: int = 0
    queue_capacity_bytes: float | None = None
    bucket_depth_bytes: float | None = None

    def __post_init__(self):
        if self.mtu_bytes <= 0:
            raise ValueError("mtu_bytes must be positive")
        if self.queue_capacity_bytes is not None and self.queue_capacity_bytes <= 0:
            raise ValueError("queue_capacity_bytes must be positive")
        if self.bucket_depth_bytes is not None and self.bucket_depth_bytes <= 0:
            raise ValueError("bucket_depth_bytes must be positive")

    def capacity_for(self, rate_bps: float) -> float:
        if self.queue_capacity_bytes is not None:
            return self.queue_capacity_bytes
        if rate_bps == UNLIMITED:
            return UNLIMITED
        return max(rate_bps * 0.500 / 8.0, 10.0 * self.mtu_bytes)

    def bucket_depth_for(self, rate_bps: float) -> float:
        if self.bucket_depth_bytes is not None:
            return self.bucket_depth_bytes
        if rate_bps == UNLIMITED:
            return float(self.mtu_bytes)
        return max(float(self.mtu_bytes), rate_bps * 0.010 / 8.0)


class EmulatedLink:
    """One emulated path.  Calls must carry non-decreasing timestamps.

    A link instance is a single logical event stream: interleave ingress /
    set_params / run_until from one caller at a time.  Distinct links are
    fully independent.
    """

    def __init__(self, config: LinkConfig | None = None,
                 params: LinkParams = IDENTITY, start_ms: float = 0.0):
        self.config = config or LinkConfig()
        self.params = params
        self._rng = random.Random(self.config.rng_seed)
        self._now = float(start_ms)
        self._capacity = self.config.capacity_for(params.rate_bps)

        self._waiting: list[Packet] = []        # FIFO behind the in-service head
        self._head: Packet | None = None        # packet currently serializing
        self._head_remaining_bits = 0.0
        self._head_anchor_ms = 0.0              # time up to which head progress is accounted
        self._bytes_in_shaper = 0.0             # head + waiting
        self._prev_release_ms = float("-inf")   # ordering guard
        self._pending: list[EgressEvent] = []   # materialized, not yet collected

    # -- time bookkeeping ----------------------------------------------------

    @property
    def now_ms(self) -> float:
        return self._now

    def _require_time(self, t_ms: float) -> None:
        if t_ms < self._now:
            raise TimeRegression(f"t_ms {t_ms} precedes link time {self._now}")

    def _advance(self, to_ms: float) -> None:
        """Serve queued packets whose shaper departure falls at or before to_ms."""
        while self._head is not None:
            rate = self.params.rate_bps
            if rate == 0.0:
                self._head_anchor_ms = to_ms  # blocked: no progress
                break
            if rate == UNLIMITED:
                completion = self._head_anchor_ms
            else:
                completion = self._head_anchor_ms + self._head_remaining_bits / rate * 1000.0
            if completion > to_ms:
                self._head_remaining_bits -= rate * (to_ms - self._head_anchor_ms) / 1000.0
                self._head_anchor_ms = to_ms
                break
            self._depart_head(completion)
        if to_ms > self._now:
            self._now = to_ms

    def _depart_head(self, departure_ms: float) -> None:
        p = self.params  # params in force at departure govern the delay line
        offset = self._rng.uniform(-p.jitter_ms, p.jitter_ms)
        release = departure_ms + p.base_delay_ms + offset
        if release < departure_ms:
            release = departure_ms
        if release < self._prev_release_ms:
            release = self._prev_release_ms
        self._prev_release_ms = release
        self._pending.append(EgressEvent(self._head, egress_ts_ms=release))
        self._bytes_in_shaper -= self._head.size_bytes
        if self._waiting:
            nxt = self._waiting.pop(0)
            self._head = nxt
            self._head_remaining_bits = nxt.size_bytes * 8.0
            self._head_anchor_ms = departure_ms
        else:
            self._head = None

    # -- public operations -----------------------------------------------------

    def set_params(self, t_ms: float, params: LinkParams) -> None:
        """Apply new shaping parameters at t_ms.

        Packets already queued are drained at the new rate; the queue is not
        flushed.  Queue capacity is recomputed from the new rate.
        """
        self._require_time(t_ms)
        self._advance(t_ms)
        self.params = params
        self._capacity = self.config.capacity_for(params.rate_bps)

    def ingress(self, packet: Packet) -> EgressEvent | None:
        """Submit a packet; returns the drop event if it is dropped on entry."""
        self._require_time(packet.ingress_ts_ms)
        self._advance(packet.ingress_ts_ms)
        if self._rng.random() < self.params.loss_rate:
            event = EgressEvent(packet, egress_ts_ms=packet.ingress_ts_ms,
                                dropped=True, drop_reason="loss_draw")
            self._pending.append(event)
            return event
        if self._bytes_in_shaper + packet.size_bytes > self._capacity:
            event = EgressEvent(packet, egress_ts_ms=packet.ingress_ts_ms,
                                dropped=True, drop_reason="queue_full")
            self._pending.append(event)
            return event
        self._bytes_in_shaper += packet.size_bytes
        if self._head is None:
            self._head = packet
            self._head_remaining_bits = packet.size_bytes * 8.0
            self._head_anchor_ms = packet.ingress_ts_ms
        else:
            self._waiting.append(packet)
        return None

    def run_until(self, t_ms: float) -> list[EgressEvent]:
        """Collect all events with egress_ts_ms <= t_ms, in time order."""
        self._require_time(t_ms)
        self._advance(t_ms)
        due = [e for e in self._pending if e.egress_ts_ms <= t_ms]
        if due:
            self._pending = [e for e in self._pending if e.egress_ts_ms > t_ms]
            due.sort(key=lambda e: e.egress_ts_ms)  # stable: creation order kept on ties
        return due

    def next_event_time(self) -> float | None:
        """Earliest future time at which an event can fire, or None if idle."""
        candidates = [e.egress_ts_ms for e in self._pending]
        if self._head is not None:
            rate = self.params.rate_bps
            if rate == UNLIMITED:
                candidates.append(self._head_anchor_ms)
            elif rate > 0.0:
                candidates.append(self._head_anchor_ms
                                  + self._head_remaining_bits / rate * 1000.0)
        return min(candidates) if candidates else None

    @property
    def in_flight(self) -> int:
        """Packets admitted but not yet collected via run_until."""
        queued = len(self._waiting) + (1 if self._head is not None else 0)
        return queued + len(self._pending)


def params_from_row(row: ScenarioRow) -> LinkParams:
    return LinkParams(rate_bps=row.throughput_bps, base_delay_ms=row.delay_ms,
                      jitter_ms=row.jitter_ms, loss_rate=row.loss_rate)


def run_sequence(link: EmulatedLink, changes: list[tuple[float, LinkParams]],
                 packets: list[Packet], horizon_ms: float) -> list[EgressEvent]:
    """Feed parameter changes and packets in time order, collect up to horizon.

    At equal timestamps a parameter change is applied before the packet, so
    the packet sees the new parameters.
    """
    merged: list[tuple[float, int, object]] = []
    for t, params in changes:
        merged.append((t, 0, params))
    for pkt in packets:
        merged.append((pkt.ingress_ts_ms, 1, pkt))
    merged.sort(key=lambda item: (item[0], item[1]))
    for t, kind, payload in merged:
        if t > horizon_ms:
            break
        if kind == 0:
            link.set_params(t, payload)
        else:
            link.ingress(payload)
    return link.run_until(horizon_ms)


def drive_from_scenario(link: EmulatedLink, scenario: Scenario,
                        packets: list[Packet] = (), drain_ms: float = 5000.0,
                        ) -> list[EgressEvent]:
    """Drive the link along a scenario timeline (zero-order hold between rows).

    The timeline ends at the last row; the link then keeps the final row's
    parameters for drain_ms so in-flight packets can still egress.
    """
    changes = [(float(row.t_ms), params_from_row(row)) for row in scenario.rows]
    horizon = scenario.t_end_ms + scenario.delta_ms + drain_ms
    return run_sequence(link, changes, list(packets), horizon)
