"""Constant-bitrate UDP-style probe and per-interval report aggregation.

The probe emits fixed-size packets at a fixed rate; the aggregation bins the
outcome into fixed reporting intervals like an iperf-class tool:

* Loss is attributed to the interval in which a packet was SENT, so intervals
  with 100% loss still appear in reports, and per-interval
  loss = 1 - received/expected holds exactly.
* Throughput, delay and jitter are receiver-side: packets are binned by their
  arrival time normalized by the run's minimum observed one-way delay.  The
  normalization anchors the receive grid on the send grid (in steady state a
  packet lands in the interval it was sent in), so reports from runs with
  different base delays stay comparable interval by interval.  Reported delay
  values themselves are NOT normalized unless explicitly requested
  (``normalize_delay=True`` is meant for wall-clock runs across unsynchronized
  clocks, where the absolute one-way delay carries an unknown offset).
* Jitter is the smoothed inter-arrival delay variation with gain 1/16 (the
  RTP-style estimator), carried across intervals and reported at interval end.
* Intervals with no arrivals repeat the previous interval's mean delay so all
  report fields stay finite.

In simulated mode sender and receiver share one virtual clock, so one-way
delay is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import NamedTuple

from .errors import GridViolation, MalformedRow
from .emulator import EgressEvent, Packet
from .ingest import (_check_header, _data_lines, _parse_float, _parse_int,
                     format_kbps, kbps_to_bps)
from .model import NetSample


@dataclass(frozen=True)
class ProbeConfig:
    offered_load_bps: float = 1_000_000.0
    packet_size_bytes: int = 1250
    report_interval_ms: int = 50
    duration_ms: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.offered_load_bps <= 0:
            raise ValueError("offered_load_bps must be positive")
        if self.packet_size_bytes < 28:
            raise ValueError("packet_size_bytes must be >= 28 (UDP/IP header floor)")
        if self.report_interval_ms <= 0:
            raise ValueError("report_interval_ms must be positive")
        if self.duration_ms <= 0:
            raise ValueError("duration_ms must be positive")

    @property
    def spacing_ms(self) -> float:
        return self.packet_size_bytes * 8.0 * 1000.0 / self.offered_load_bps


class ProbeSend(NamedTuple):
    send_ts_ms: float
    seq: int
    size_bytes: int


@dataclass(frozen=True)
class ProbeReport:
    t_ms: int
    throughput_bps: float
    mean_delay_ms: float
    jitter_ms: float
    loss_rate: float
    packets_received: int
    packets_expected: int


def send_schedule(cfg: ProbeConfig) -> list[ProbeSend]:
    """Evenly spaced sends covering [0, duration); seq starts at 0."""
    spacing = cfg.spacing_ms
    sends = []
    seq = 0
    while True:
        t = seq * spacing  # multiplicative to avoid accumulation drift
        if t >= cfg.duration_ms:
            break
        sends.append(ProbeSend(send_ts_ms=t, seq=seq, size_bytes=cfg.packet_size_bytes))
        seq += 1
    return sends


def schedule_packets(cfg: ProbeConfig) -> list[Packet]:
    return [Packet(seq=s.seq, size_bytes=s.size_bytes, ingress_ts_ms=s.send_ts_ms)
            for s in send_schedule(cfg)]


def aggregate(sends: list[ProbeSend], events: list[EgressEvent],
              cfg: ProbeConfig, *, normalize_delay: bool = False,
              ) -> list[ProbeReport]:
    """Fold send records and egress events into per-interval reports.

    ``events`` must be time-sorted (as produced by the link).  Packets without
    a matching send record are ignored.
    """
    width = cfg.report_interval_ms
    send_by_seq = {s.seq: s for s in sends}

    delivered = []  # (egress_ts, delay, size) in arrival order
    for ev in events:
        if ev.dropped:
            continue
        send = send_by_seq.get(ev.packet.seq)
        if send is None:
            continue
        delivered.append((ev.egress_ts_ms, ev.egress_ts_ms - send.send_ts_ms,
                          ev.packet.size_bytes))

    d_align = min((d for _, d, _ in delivered), default=0.0)

    bytes_in: dict[int, int] = {}
    delays_in: dict[int, list[float]] = {}
    jitter_at: dict[int, float] = {}
    jitter = 0.0
    prev_delay = None
    max_bucket = -1
    for egress_ts, delay, size in delivered:
        bucket = int((egress_ts - d_align) // width)
        bytes_in[bucket] = bytes_in.get(bucket, 0) + size
        delays_in.setdefault(bucket, []).append(delay)
        if prev_delay is not None:
            jitter += (abs(delay - prev_delay) - jitter) / 16.0
        prev_delay = delay
        jitter_at[bucket] = jitter
        max_bucket = max(max_bucket, bucket)

    expected: dict[int, int] = {}
    received: dict[int, int] = {}
    delivered_seqs = {ev.packet.seq for ev in events if not ev.dropped}
    for s in sends:
        bucket = int(s.send_ts_ms // width)
        expected[bucket] = expected.get(bucket, 0) + 1
        if s.seq in delivered_seqs:
            received[bucket] = received.get(bucket, 0) + 1
        max_bucket = max(max_bucket, bucket)

    reports = []
    carried_delay = 0.0
    carried_jitter = 0.0
    for k in range(0, max_bucket + 1):
        if k in delays_in:
            carried_delay = fmean(delays_in[k])
        if k in jitter_at:
            carried_jitter = jitter_at[k]
        exp = expected.get(k, 0)
        got = received.get(k, 0)
        mean_delay = carried_delay - d_align if normalize_delay else carried_delay
        reports.append(ProbeReport(
            t_ms=k * width,
            throughput_bps=bytes_in.get(k, 0) * 8.0 * 1000.0 / width,
            mean_delay_ms=mean_delay,
            jitter_ms=carried_jitter,
            loss_rate=1.0 - got / exp if exp > 0 else 0.0,
            packets_received=got,
            packets_expected=exp,
        ))
    return reports


# --- report CSV -------------------------------------------------------------

REPORT_HEADER = "ts_ms,throughput_kbps,mean_delay_ms,jitter_ms,loss_rate,received,expected"


def write_reports_csv(reports: list[ProbeReport]) -> str:
    lines = [REPORT_HEADER]
    for r in reports:
        lines.append(
            f"{r.t_ms},{format_kbps(r.throughput_bps)},{r.mean_delay_ms:.3f},"
            f"{r.jitter_ms:.3f},{r.loss_rate:.6f},{r.packets_received},"
            f"{r.packets_expected}"
        )
    return "\n".join(lines) + "\n"


def read_reports_csv(text: str) -> list[ProbeReport]:
    lines = _check_header(_data_lines(text), REPORT_HEADER)
    if not lines:
        raise GridViolation("report file has no data rows")
    reports = []
    for no, line in lines:
        parts = line.split(",")
        if len(parts) != 7:
            raise MalformedRow(no, f"expected 7 fields, got {len(parts)}")
        reports.append(ProbeReport(
            t_ms=_parse_int(parts[0], no, "ts_ms"),
            throughput_bps=kbps_to_bps(_parse_float(parts[1], no, "throughput_kbps")),
            mean_delay_ms=_parse_float(parts[2], no, "mean_delay_ms"),
            jitter_ms=_parse_float(parts[3], no, "jitter_ms"),
            loss_rate=_parse_float(parts[4], no, "loss_rate"),
            packets_received=_parse_int(parts[5], no, "received"),
            packets_expected=_parse_int(parts[6], no, "expected"),
        ))
    return reports


def reports_to_net_samples(reports: list[ProbeReport]) -> list[NetSample]:
    """Reinterpret probe reports as a network trace (for replaying a run)."""
    return [NetSample(t_ms=r.t_ms, throughput_bps=r.throughput_bps,
                      delay_ms=max(r.mean_delay_ms, 0.0),
                      jitter_ms=max(r.jitter_ms, 0.0),
                      loss_rate=min(max(r.loss_rate, 0.0), 1.0))
            for r in reports]
