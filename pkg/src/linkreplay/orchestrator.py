"""Multipath replay assembly: N emulated paths between a vehicle endpoint and
a receiver endpoint, three interchangeable backends, and the synchronized
position-replay stream.

Backends:

* ``simulated`` — in-process links driven on a virtual clock.  Deterministic
  and faster than real time; the clock can also be paced against wall time at
  a configurable speed for interactive sessions.
* ``udp_proxy`` — one live UDP relay per path; real traffic traverses the
  emulated link on the wall clock, no kernel privileges needed.
* ``tc_script`` — emission of a deterministic shell script that replays the
  scenario timeline with tc on a real interface.  Emission only: executing it
  on a middlebox is deployment, not library scope.

All paths share one scenario epoch and grid (traces from the same drive are
co-timed); parameters hold between rows (zero-order hold).
"""

from __future__ import annotations

import json
import queue
import socket
import struct
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .emulator import (
    EgressEvent,
    EmulatedLink,
    LinkConfig,
    LinkParams,
    Packet,
    params_from_row,
)
from .errors import (
    BindFailure,
    InvalidTransition,
    ScenarioMismatch,
)
from .ingest import format_kbps, read_scenario_csv
from .model import Scenario, validate_scenario
from .probe import ProbeConfig, ProbeReport, ProbeSend, aggregate, send_schedule

DEFAULT_DRAIN_MS = 5000.0


# --------------------------------------------------------------------------
# topology configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PathSpec:
    path_id: str
    scenario: Scenario
    link_config: LinkConfig = field(default_factory=LinkConfig)


@dataclass(frozen=True)
class Endpoints:
    vehicle: tuple[str, int] = ("127.0.0.1", 0)
    receiver: tuple[str, int] = ("127.0.0.1", 0)


_MODE_CLOCKS = {"simulated": "virtual", "udp_proxy": "wall", "tc_script": "none"}


@dataclass(frozen=True)
class TopologyConfig:
    paths: tuple[PathSpec, ...]
    mode: str = "simulated"
    clock: str = "virtual"
    position_stream_hz: float = 20.0
    endpoints: Endpoints = field(default_factory=Endpoints)

    def __post_init__(self):
        if not self.paths:
            raise ScenarioMismatch("topology needs at least one path")
        ids = [p.path_id for p in self.paths]
        if len(set(ids)) != len(ids):
            raise ScenarioMismatch(f"duplicate path_ids: {ids}")
        if self.mode not in _MODE_CLOCKS:
            raise ScenarioMismatch(f"unknown mode {self.mode!r}")
        required = _MODE_CLOCKS[self.mode]
        if required != "none" and self.clock != required:
            raise ScenarioMismatch(
                f"mode {self.mode!r} requires the {required!r} clock, got {self.clock!r}"
            )
        if self.position_stream_hz <= 0:
            raise ScenarioMismatch("position_stream_hz must be positive")
        _check_shared_grid([p.scenario for p in self.paths])


def _check_shared_grid(scenarios: list[Scenario]) -> None:
    first = scenarios[0]
    for s in scenarios[1:]:
        if s.delta_ms != first.delta_ms:
            raise ScenarioMismatch(
                f"path {s.path_id!r} grid {s.delta_ms} ms differs from "
                f"{first.path_id!r} grid {first.delta_ms} ms"
            )
        if s.t_start_ms != first.t_start_ms:
            raise ScenarioMismatch(
                f"path {s.path_id!r} epoch {s.t_start_ms} differs from "
                f"{first.path_id!r} epoch {first.t_start_ms}"
            )


def _parse_addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def load_topology(path: str | Path) -> TopologyConfig:
    """Load a topology config file; scenario files resolve relative to it."""
    path = Path(path)
    raw = json.loads(path.read_text())
    paths = []
    for entry in raw.get("paths", []):
        scenario_file = path.parent / entry["scenario_file"]
        scenario = read_scenario_csv(scenario_file.read_text(),
                                     path_id=entry["path_id"])
        violations = validate_scenario(scenario)
        if violations:
            raise ScenarioMismatch(
                f"scenario {scenario_file} invalid: {violations[0]}"
            )
        link_config = LinkConfig(**entry.get("link_config", {}))
        paths.append(PathSpec(path_id=entry["path_id"], scenario=scenario,
                              link_config=link_config))
    mode = raw.get("mode", "simulated")
    endpoints = Endpoints()
    if "endpoints" in raw:
        endpoints = Endpoints(
            vehicle=_parse_addr(raw["endpoints"].get("vehicle", "127.0.0.1:0")),
            receiver=_parse_addr(raw["endpoints"].get("receiver", "127.0.0.1:0")),
        )
    return TopologyConfig(
        paths=tuple(paths),
        mode=mode,
        clock=raw.get("clock", _MODE_CLOCKS.get(mode, "virtual")),
        position_stream_hz=raw.get("position_stream_hz", 20.0),
        endpoints=endpoints,
    )


# --------------------------------------------------------------------------
# events and results
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ApiEvent:
    """One record of the observable replay stream."""

    t_ms: float
    kind: str  # position | link_params | probe_report | state_change
    path_id: str | None
    payload: dict

    def to_json(self) -> str:
        return json.dumps({"t_ms": self.t_ms, "kind": self.kind,
                           "path_id": self.path_id, "payload": self.payload},
                          separators=(",", ":"))


@dataclass
class PathResult:
    path_id: str
    sends: list[ProbeSend]
    events: list[EgressEvent]
    reports: list[ProbeReport]


@dataclass
class ReplayResult:
    paths: dict[str, PathResult]
    positions: list[tuple[int, float, float]]
    tc_scripts: dict[str, str] = field(default_factory=dict)


# --------------------------------------------------------------------------
# the row-stepping replay engine (shared by run_replay and ReplaySession)
# --------------------------------------------------------------------------

class _ReplayEngine:
    """Steps a multipath replay one scenario row at a time.

    Equal-length call sequences per link make results independent of whether
    the engine runs in one tight loop or paced row by row, and observers see
    events without being able to perturb the simulation.
    """

    def __init__(self, cfg: TopologyConfig, probe_cfg: ProbeConfig | None,
                 emit=None, drain_ms: float = DEFAULT_DRAIN_MS):
        self.cfg = cfg
        self.probe_cfg = probe_cfg
        self.emit = emit
        self.drain_ms = drain_ms
        ref = cfg.paths[0].scenario
        self.delta = ref.delta_ms
        self.t0 = ref.t_start_ms
        self.n_rows = max(len(p.scenario.rows) for p in cfg.paths)
        self.position_stride = max(1, round(1000.0 / cfg.position_stream_hz / self.delta))
        self.reset(0)

    # -- state management ---------------------------------------------------

    def reset(self, row_index: int) -> None:
        """(Re)build all links fresh and position the timeline at row_index.

        Used by start and by seek: in-flight packets are flushed, not
        replayed, and collected data at or after the target row is discarded.
        """
        t_target = self.t0 + row_index * self.delta
        if row_index == 0:
            self.sends = {}
            self.events = {}
            self.positions = []
        else:
            self.positions = [p for p in self.positions if p[0] < t_target]
        self.links = {}
        self.send_pointer = {}
        for spec in self.cfg.paths:
            first_row = spec.scenario.rows[min(row_index, len(spec.scenario.rows) - 1)]
            self.links[spec.path_id] = EmulatedLink(
                config=spec.link_config,
                params=params_from_row(first_row),
                start_ms=float(t_target),
            )
            schedule = []
            if self.probe_cfg is not None:
                schedule = [ProbeSend(s.send_ts_ms + self.t0, s.seq, s.size_bytes)
                            for s in send_schedule(self.probe_cfg)]
            if row_index == 0:
                self.sends[spec.path_id] = []
                self.events[spec.path_id] = []
            else:
                self.sends[spec.path_id] = [
                    s for s in self.sends.get(spec.path_id, []) if s.send_ts_ms < t_target]
                self.events[spec.path_id] = [
                    e for e in self.events.get(spec.path_id, []) if e.egress_ts_ms < t_target]
            self.schedule = schedule  # identical for every path
            self.send_pointer[spec.path_id] = next(
                (i for i, s in enumerate(schedule) if s.send_ts_ms >= t_target),
                len(schedule),
            )
        self._full_schedule = schedule
        self.row_index = row_index
        self.drain_t = None
        self.t_ms = t_target

    # -- observation ----------------------------------------------------------

    def _publish(self, event: ApiEvent) -> None:
        if self.emit is not None:
            self.emit(event)

    def current_position(self) -> tuple[float, float] | None:
        spec = self.cfg.paths[0]
        idx = min(self.row_index, len(spec.scenario.rows) - 1)
        row = spec.scenario.rows[idx]
        return row.lat_deg, row.lon_deg

    def current_params(self) -> dict[str, LinkParams]:
        return {pid: link.params for pid, link in self.links.items()}

    # -- stepping -------------------------------------------------------------

    def step(self) -> bool:
        """Process one scenario row (or one drain step); False when done."""
        if self.row_index < self.n_rows:
            self._process_row(self.row_index)
            self.row_index += 1
            return True
        return self._drain_step()

    def _process_row(self, i: int) -> None:
        t = self.t0 + i * self.delta
        self.t_ms = t
        for spec in self.cfg.paths:
            rows = spec.scenario.rows
            row = rows[min(i, len(rows) - 1)]
            link = self.links[spec.path_id]
            link.set_params(float(t), params_from_row(row))
            self._publish(ApiEvent(
                t_ms=t, kind="link_params", path_id=spec.path_id,
                payload={"rate_bps": row.throughput_bps, "base_delay_ms": row.delay_ms,
                         "jitter_ms": row.jitter_ms, "loss_rate": row.loss_rate,
                         "corrected": row.corrected},
            ))
        if i % self.position_stride == 0:
            ref_rows = self.cfg.paths[0].scenario.rows
            row = ref_rows[min(i, len(ref_rows) - 1)]
            self.positions.append((t, row.lat_deg, row.lon_deg))
            self._publish(ApiEvent(
                t_ms=t, kind="position", path_id=None,
                payload={"lat_deg": row.lat_deg, "lon_deg": row.lon_deg},
            ))
        horizon = float(t + self.delta)
        for spec in self.cfg.paths:
            pid = spec.path_id
            link = self.links[pid]
            pointer = self.send_pointer[pid]
            while pointer < len(self._full_schedule) and \
                    self._full_schedule[pointer].send_ts_ms < horizon:
                send = self._full_schedule[pointer]
                self.sends[pid].append(send)
                link.ingress(Packet(seq=send.seq, size_bytes=send.size_bytes,
                                    ingress_ts_ms=send.send_ts_ms))
                pointer += 1
            self.send_pointer[pid] = pointer
            self.events[pid].extend(link.run_until(horizon))

    def _drain_step(self) -> bool:
        """Keep the final parameters and let in-flight packets egress."""
        end = self.t0 + self.n_rows * self.delta
        if self.drain_t is None:
            self.drain_t = float(end)
        if self.drain_t >= end + self.drain_ms:
            return False
        if all(link.in_flight == 0 for link in self.links.values()):
            return False
        self.drain_t += self.delta
        for pid, link in self.links.items():
            self.events[pid].extend(link.run_until(self.drain_t))
        return True

    def finalize(self) -> ReplayResult:
        paths = {}
        for spec in self.cfg.paths:
            pid = spec.path_id
            reports = []
            if self.probe_cfg is not None:
                reports = aggregate(self.sends[pid], self.events[pid], self.probe_cfg)
                for r in reports:
                    self._publish(ApiEvent(
                        t_ms=r.t_ms, kind="probe_report", path_id=pid,
                        payload={"throughput_bps": r.throughput_bps,
                                 "mean_delay_ms": r.mean_delay_ms,
                                 "jitter_ms": r.jitter_ms, "loss_rate": r.loss_rate,
                                 "packets_received": r.packets_received,
                                 "packets_expected": r.packets_expected},
                    ))
            paths[pid] = PathResult(path_id=pid, sends=self.sends[pid],
                                    events=self.events[pid], reports=reports)
        return ReplayResult(paths=paths, positions=list(self.positions))


def run_replay(cfg: TopologyConfig, workload: ProbeConfig | None = None,
               emit=None, drain_ms: float = DEFAULT_DRAIN_MS) -> ReplayResult:
    """Run a replay to completion on the virtual clock (or emit tc scripts).

    ``workload`` is the probe configuration applied to every path; None means
    timeline-only (positions and parameter events, no packets).
    """
    if cfg.mode == "tc_script":
        result = ReplayResult(paths={}, positions=[])
        for spec in cfg.paths:
            result.tc_scripts[spec.path_id] = emit_tc_script(
                spec.scenario, interface_name=f"{spec.path_id}")
        return result
    if cfg.mode == "udp_proxy":
        return run_udp_replay(cfg, workload)
    engine = _ReplayEngine(cfg, workload, emit=emit, drain_ms=drain_ms)
    while engine.step():
        pass
    return engine.finalize()


# --------------------------------------------------------------------------
# interactive session (pause / resume / seek / speed, event fan-out)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ReplayState:
    status: str  # idle | running | paused | finished
    t_ms: int
    speed: float
    position: tuple[float, float] | None
    link_params: dict[str, LinkParams]


_SENTINEL = object()


class Subscription:
    """Bounded event feed for one observer.

    A subscriber that cannot keep up is disconnected (its queue is abandoned)
    rather than back-pressuring the replay.
    """

    def __init__(self, kinds: set[str] | None, path_id: str | None,
                 maxsize: int = 4096):
        self.kinds = kinds
        self.path_id = path_id
        self.queue: queue.Queue = queue.Queue(maxsize=maxsize)
        self.dropped = False

    def matches(self, event: ApiEvent) -> bool:
        if self.kinds is not None and event.kind not in self.kinds:
            return False
        if self.path_id is not None and event.path_id is not None \
                and event.path_id != self.path_id:
            return False
        return True

    def offer(self, item) -> None:
        if self.dropped:
            return
        try:
            self.queue.put_nowait(item)
        except queue.Full:
            self.dropped = True


class ReplaySession:
    """One controllable replay over a topology.

    The driver thread owns the simulation; control commands mutate shared
    state under the session lock and take effect at the next row boundary.
    With ``paced=True`` virtual time is paced against the wall clock at the
    current speed multiplier; ``paced=False`` runs flat out (for headless and
    test use).
    """

    def __init__(self, cfg: TopologyConfig, workload: ProbeConfig | None = None,
                 paced: bool = True, drain_ms: float = DEFAULT_DRAIN_MS):
        self.cfg = cfg
        self.workload = workload
        self.paced = paced
        self._lock = threading.RLock()
        self._wake = threading.Condition(self._lock)
        self._status = "idle"
        self._speed = 1.0
        self._stop = False
        self._thread: threading.Thread | None = None
        self._subscribers: list[Subscription] = []
        self._engine = _ReplayEngine(cfg, workload, emit=self._publish,
                                     drain_ms=drain_ms)
        self._result: ReplayResult | None = None
        # raw and (after /pipeline/correct) corrected scenario variants
        self.scenarios = {p.path_id: p.scenario for p in cfg.paths}
        self.corrected_scenarios: dict[str, Scenario] = {}
        self.active_variant = "raw"

    # -- observation --------------------------------------------------------

    def _publish(self, event: ApiEvent) -> None:
        for sub in self._subscribers:
            if sub.matches(event):
                sub.offer(event)

    def subscribe(self, kinds: set[str] | None = None,
                  path_id: str | None = None) -> Subscription:
        sub = Subscription(kinds, path_id)
        with self._lock:
            if self._status == "finished":
                sub.offer(ApiEvent(t_ms=self._engine.t_ms, kind="state_change",
                                   path_id=None, payload={"status": "finished"}))
                sub.offer(_SENTINEL)
            else:
                self._subscribers.append(sub)
        return sub

    def state(self) -> ReplayState:
        with self._lock:
            return ReplayState(
                status=self._status,
                t_ms=self._engine.t_ms,
                speed=self._speed,
                position=self._engine.current_position(),
                link_params=self._engine.current_params(),
            )

    def result(self) -> ReplayResult | None:
        with self._lock:
            return self._result

    # -- control ------------------------------------------------------------

    def control(self, cmd: str, t_ms: int | None = None,
                speed: float | None = None, variant: str | None = None,
                ) -> ReplayState:
        with self._wake:
            if cmd == "start":
                self._cmd_start(variant)
            elif cmd == "pause":
                self._expect("running", cmd)
                self._status = "paused"
            elif cmd == "resume":
                self._expect("paused", cmd)
                self._status = "running"
            elif cmd == "seek":
                self._expect("paused", cmd)
                self._cmd_seek(t_ms)
            elif cmd == "set_speed":
                if speed is None or speed <= 0:
                    raise InvalidTransition(f"set_speed needs a positive speed, got {speed}")
                self._speed = float(speed)
            else:
                raise InvalidTransition(f"unknown command {cmd!r}")
            self._wake.notify_all()
        return self.state()

    def _expect(self, status: str, cmd: str) -> None:
        if self._status != status:
            raise InvalidTransition(f"{cmd} requires status {status!r}, "
                                    f"current status is {self._status!r}")

    def _cmd_start(self, variant: str | None) -> None:
        if self._status not in ("idle", "finished"):
            raise InvalidTransition(
                f"start requires status 'idle' or 'finished', current is {self._status!r}")
        if variant is not None:
            if variant not in ("raw", "corrected"):
                raise InvalidTransition(f"unknown scenario variant {variant!r}")
            if variant == "corrected" and not self.corrected_scenarios:
                raise InvalidTransition("no corrected scenario available; "
                                        "run the correction first")
            self.active_variant = variant
        cfg = self.cfg
        if self.active_variant == "corrected":
            paths = tuple(
                PathSpec(p.path_id,
                         self.corrected_scenarios.get(p.path_id, p.scenario),
                         p.link_config)
                for p in cfg.paths)
            cfg = TopologyConfig(paths=paths, mode=cfg.mode, clock=cfg.clock,
                                 position_stream_hz=cfg.position_stream_hz,
                                 endpoints=cfg.endpoints)
        self._engine = _ReplayEngine(cfg, self.workload, emit=self._publish,
                                     drain_ms=self._engine.drain_ms)
        self._result = None
        self._status = "running"
        self._stop = False
        self._publish(ApiEvent(t_ms=self._engine.t_ms, kind="state_change",
                               path_id=None, payload={"status": "running"}))
        self._thread = threading.Thread(target=self._drive, daemon=True,
                                        name="replay-driver")
        self._thread.start()

    def _cmd_seek(self, t_ms: int | None) -> None:
        if t_ms is None:
            raise InvalidTransition("seek needs t_ms")
        engine = self._engine
        span_end = engine.t0 + (engine.n_rows - 1) * engine.delta
        if not engine.t0 <= t_ms <= span_end:
            raise InvalidTransition(
                f"seek target {t_ms} outside scenario span [{engine.t0}, {span_end}]")
        engine.reset((t_ms - engine.t0) // engine.delta)

    # -- driver ---------------------------------------------------------------

    def _drive(self) -> None:
        last_wall = time.monotonic()
        while True:
            with self._wake:
                while self._status == "paused" and not self._stop:
                    self._wake.wait(0.1)
                    last_wall = time.monotonic()
                if self._stop:
                    return
                more = self._engine.step()
                if not more:
                    self._result = self._engine.finalize()
                    self._status = "finished"
                    self._publish(ApiEvent(t_ms=self._engine.t_ms,
                                           kind="state_change", path_id=None,
                                           payload={"status": "finished"}))
                    for sub in self._subscribers:
                        sub.offer(_SENTINEL)
                    self._wake.notify_all()
                    return
                speed = self._speed
            if self.paced:
                due = last_wall + self._engine.delta / 1000.0 / speed
                delay = due - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                last_wall = due
            else:
                last_wall = time.monotonic()

    def shutdown(self) -> None:
        with self._wake:
            self._stop = True
            self._wake.notify_all()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def wait_finished(self, timeout: float = 60.0) -> bool:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self._lock:
                if self._status == "finished":
                    return True
            time.sleep(0.005)
        return False


# --------------------------------------------------------------------------
# tc-script backend (emission only)
# --------------------------------------------------------------------------

def emit_tc_script(scenario: Scenario, interface_name: str) -> str:
    """Deterministic shell script replaying the scenario timeline with tc.

    Stage layout: a tbf rate shaper at the root (handle 1:) with burst =
    max(mtu, 10 ms of rate) and limit = 500 ms of rate (floor 10 MTU), and a
    netem delay/jitter/loss stage below it (handle 10:).  Rates below 1 kbit/s
    are floored to 1kbit because tbf cannot express a zero rate.
    """
    cfg = LinkConfig()
    delta_s = scenario.delta_ms / 1000.0

    def tbf_args(row) -> str:
        rate = max(row.throughput_bps, 1000.0)
        burst = int(round(cfg.bucket_depth_for(rate)))
        limit = int(round(cfg.capacity_for(rate)))
        return f"tbf rate {format_kbps(rate)}kbit burst {burst}b limit {limit}b"

    def netem_args(row) -> str:
        return (f"netem delay {row.delay_ms:.3f}ms {row.jitter_ms:.3f}ms "
                f"loss {row.loss_rate * 100.0:.6f}%")

    first = scenario.rows[0]
    lines = [
        "#!/bin/sh",
        f"# shaping timeline for one emulated path ({len(scenario.rows)} rows, "
        f"{scenario.delta_ms} ms grid)",
        "# stage 1 (handle 1:): tbf rate shaper; stage 2 (handle 10:): netem "
        "delay/jitter/loss",
        "# rates below 1 kbit/s are floored to 1kbit (tbf cannot express 0)",
        "set -e",
        f"IF={interface_name}",
        'tc qdisc del dev "$IF" root 2>/dev/null || true',
        f'tc qdisc add dev "$IF" root handle 1: {tbf_args(first)}',
        f'tc qdisc add dev "$IF" parent 1:1 handle 10: {netem_args(first)}',
    ]
    for row in scenario.rows[1:]:
        lines.append(f"sleep {delta_s:.3f}")
        lines.append(f'tc qdisc change dev "$IF" root handle 1: {tbf_args(row)}')
        lines.append(f'tc qdisc change dev "$IF" parent 1:1 handle 10: {netem_args(row)}')
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# udp_proxy backend (live relay on the wall clock)
# --------------------------------------------------------------------------

_PROBE_HEADER = struct.Struct("!Id")  # seq, send_ts_ms


class UdpRelay(threading.Thread):
    """One live relay: stamps arrivals, runs them through the emulated link,
    forwards at release time.  Single-threaded per path, so timestamps are
    naturally monotone."""

    def __init__(self, path_id: str, scenario: Scenario, link_config: LinkConfig,
                 listen: tuple[str, int], forward: tuple[str, int]):
        super().__init__(daemon=True, name=f"relay-{path_id}")
        self.path_id = path_id
        self.scenario = scenario
        self.forward = forward
        try:
            self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self.sock.bind(listen)
        except OSError as exc:
            raise BindFailure(f"cannot bind relay for {path_id} on {listen}: {exc}") from exc
        self.listen_addr = self.sock.getsockname()
        self.link = EmulatedLink(config=link_config,
                                 params=params_from_row(scenario.rows[0]))
        self._stop = threading.Event()

    def stop(self) -> None:
        self._stop.set()

    def run(self) -> None:
        anchor = time.monotonic()
        rows = self.scenario.rows
        t0 = self.scenario.t_start_ms
        row_idx = 0
        seq = 0
        try:
            while not self._stop.is_set():
                now = (time.monotonic() - anchor) * 1000.0
                while row_idx < len(rows) and rows[row_idx].t_ms - t0 <= now:
                    self.link.set_params(max(now, self.link.now_ms),
                                         params_from_row(rows[row_idx]))
                    row_idx += 1
                for ev in self.link.run_until(now):
                    if not ev.dropped:
                        self.sock.sendto(ev.packet.payload, self.forward)
                timeout = 0.02
                nxt = self.link.next_event_time()
                if nxt is not None:
                    timeout = min(timeout, max((nxt - now) / 1000.0, 0.0005))
                if row_idx < len(rows):
                    row_due = (rows[row_idx].t_ms - t0 - now) / 1000.0
                    timeout = min(timeout, max(row_due, 0.0005))
                self.sock.settimeout(timeout)
                try:
                    data, _ = self.sock.recvfrom(65535)
                except socket.timeout:
                    continue
                except OSError:
                    break
                stamp = (time.monotonic() - anchor) * 1000.0
                self.link.ingress(Packet(seq=seq, size_bytes=len(data),
                                         ingress_ts_ms=max(stamp, self.link.now_ms),
                                         payload=data))
                seq += 1
        finally:
            self.sock.close()


def run_udp_replay(cfg: TopologyConfig, workload: ProbeConfig | None,
                   linger_s: float = 1.0) -> ReplayResult:
    """Run the probe through live UDP relays on loopback-style endpoints.

    One relay per path; with an explicit receiver port, path i uses port+i.
    Sender and receiver share this process's monotonic clock, so one-way
    delay is exact.
    """
    relays: list[UdpRelay] = []
    receivers: list[socket.socket] = []
    result = ReplayResult(paths={}, positions=[])
    try:
        for i, spec in enumerate(cfg.paths):
            rhost, rport = cfg.endpoints.receiver
            recv_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            try:
                recv_sock.bind((rhost, rport + i if rport else 0))
            except OSError as exc:
                raise BindFailure(f"cannot bind receiver on {rhost}:{rport}: {exc}") from exc
            receivers.append(recv_sock)
            vhost, vport = cfg.endpoints.vehicle
            relay = UdpRelay(spec.path_id, spec.scenario, spec.link_config,
                             listen=(vhost, vport + i if vport else 0),
                             forward=recv_sock.getsockname())
            relays.append(relay)
            relay.start()

        if workload is None:
            time.sleep((cfg.paths[0].scenario.t_end_ms
                        - cfg.paths[0].scenario.t_start_ms) / 1000.0 + linger_s)
            return result

        for spec, relay, recv_sock in zip(cfg.paths, relays, receivers):
            sends, events = _run_wall_probe(workload, relay.listen_addr,
                                            recv_sock, linger_s)
            reports = aggregate(sends, events, workload)
            result.paths[spec.path_id] = PathResult(
                path_id=spec.path_id, sends=sends, events=events, reports=reports)
        return result
    finally:
        for relay in relays:
            relay.stop()
        for sock in receivers:
            sock.close()


def _run_wall_probe(cfg: ProbeConfig, target: tuple[str, int],
                    recv_sock: socket.socket, linger_s: float,
                    ) -> tuple[list[ProbeSend], list[EgressEvent]]:
    """CBR sender + receiver pair around one relay, on the wall clock."""
    sends: list[ProbeSend] = []
    arrivals: list[tuple[int, float, float, int]] = []  # seq, send_ts, arrival, size
    anchor = time.monotonic()
    stop_recv = threading.Event()

    def now_ms() -> float:
        return (time.monotonic() - anchor) * 1000.0

    def receiver() -> None:
        recv_sock.settimeout(0.05)
        while not stop_recv.is_set():
            try:
                data, _ = recv_sock.recvfrom(65535)
            except socket.timeout:
                continue
            except OSError:
                break
            stamp = now_ms()
            if len(data) < _PROBE_HEADER.size:
                continue
            seq, send_ts = _PROBE_HEADER.unpack_from(data)
            arrivals.append((seq, send_ts, stamp, len(data)))

    def sender() -> None:
        out = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        pad = b"\x00" * (cfg.packet_size_bytes - _PROBE_HEADER.size)
        for s in send_schedule(cfg):
            wait = s.send_ts_ms / 1000.0 - (time.monotonic() - anchor)
            if wait > 0:
                time.sleep(wait)
            stamp = now_ms()
            out.sendto(_PROBE_HEADER.pack(s.seq, stamp) + pad, target)
            sends.append(ProbeSend(send_ts_ms=stamp, seq=s.seq,
                                   size_bytes=cfg.packet_size_bytes))
        out.close()

    recv_thread = threading.Thread(target=receiver, daemon=True)
    send_thread = threading.Thread(target=sender, daemon=True)
    recv_thread.start()
    send_thread.start()
    send_thread.join()
    time.sleep(linger_s)
    stop_recv.set()
    recv_thread.join(timeout=2.0)

    events = [EgressEvent(Packet(seq=seq, size_bytes=size, ingress_ts_ms=send_ts),
                          egress_ts_ms=arrival)
              for seq, send_ts, arrival, size in sorted(arrivals, key=lambda a: a[2])]
    return sends, events
