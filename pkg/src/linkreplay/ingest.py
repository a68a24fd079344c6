"""Parsing and serialization of trace and scenario files.

All files are UTF-8 CSV with LF line endings.  Lines starting with ``#`` are
comments and are ignored, as are blank lines.  Formats:

  position trace:  ts_ms,lat,lon
  network trace:   ts_ms,throughput_kbps,delay_ms,jitter_ms,loss_rate
  scenario file:   ts_ms,lat,lon,throughput_kbps,delay_ms,jitter_ms,loss_rate,corrected

Throughput is kbps on disk and bits/s in memory.  lat/lon are printed with 6
decimals, delay/jitter with 3, loss_rate with 6, so identical scenarios
serialize byte-identically.  Parsers never silently drop data rows: every
data line either contributes a sample or raises.
"""

from __future__ import annotations

import math

from .errors import (
    DuplicateTimestamp,
    EmptyTrace,
    GridViolation,
    MalformedRow,
    NonUniformGrid,
    RangeViolation,
)
from .model import NetSample, PositionSample, Scenario, ScenarioRow

POSITION_HEADER = "ts_ms,lat,lon"
NET_HEADER = "ts_ms,throughput_kbps,delay_ms,jitter_ms,loss_rate"
SCENARIO_HEADER = "ts_ms,lat,lon,throughput_kbps,delay_ms,jitter_ms,loss_rate,corrected"

DEFAULT_DELTA_MS = 50


def _data_lines(text: str) -> list[tuple[int, str]]:
    """(1-based line number, stripped content) for every non-comment line."""
    out = []
    for no, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append((no, stripped))
    return out


def _check_header(lines: list[tuple[int, str]], expected: str) -> list[tuple[int, str]]:
    if not lines:
        raise EmptyTrace("file has no header")
    no, header = lines[0]
    if header != expected:
        got = set(header.split(","))
        want = set(expected.split(","))
        missing = sorted(want - got)
        if missing:
            raise GridViolation(f"line {no}: missing column(s): {', '.join(missing)}")
        raise GridViolation(f"line {no}: bad header {header!r}, expected {expected!r}")
    return lines[1:]


def _parse_int(raw: str, line_no: int, name: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise MalformedRow(line_no, f"{name} is not an integer: {raw!r}") from None


def _parse_float(raw: str, line_no: int, name: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise MalformedRow(line_no, f"{name} is not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise MalformedRow(line_no, f"{name} is not finite: {raw!r}")
    return value


def parse_position_csv(text: str) -> list[PositionSample]:
    """Parse a position trace; rows are sorted by timestamp.

    Out-of-order rows are sorted (field loggers flush out of order), duplicate
    timestamps are rejected as corruption.
    """
    lines = _check_header(_data_lines(text), POSITION_HEADER)
    if not lines:
        raise EmptyTrace("position trace has no data rows")
    samples = []
    for no, line in lines:
        parts = line.split(",")
        if len(parts) != 3:
            raise MalformedRow(no, f"expected 3 fields, got {len(parts)}")
        t_ms = _parse_int(parts[0], no, "ts_ms")
        lat = _parse_float(parts[1], no, "lat")
        lon = _parse_float(parts[2], no, "lon")
        if not -90.0 <= lat <= 90.0:
            raise MalformedRow(no, f"lat {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            raise MalformedRow(no, f"lon {lon} outside [-180, 180]")
        samples.append(PositionSample(t_ms=t_ms, lat_deg=lat, lon_deg=lon))
    samples.sort(key=lambda s: s.t_ms)
    for prev, cur in zip(samples, samples[1:]):
        if cur.t_ms == prev.t_ms:
            raise DuplicateTimestamp(f"duplicate ts_ms {cur.t_ms}")
    return samples


def parse_net_csv(text: str) -> list[NetSample]:
    """Parse a network trace; verifies the uniform sample grid."""
    lines = _check_header(_data_lines(text), NET_HEADER)
    if not lines:
        raise EmptyTrace("network trace has no data rows")
    samples = []
    for no, line in lines:
        parts = line.split(",")
        if len(parts) != 5:
            raise MalformedRow(no, f"expected 5 fields, got {len(parts)}")
        t_ms = _parse_int(parts[0], no, "ts_ms")
        kbps = _parse_float(parts[1], no, "throughput_kbps")
        delay = _parse_float(parts[2], no, "delay_ms")
        jitter = _parse_float(parts[3], no, "jitter_ms")
        loss = _parse_float(parts[4], no, "loss_rate")
        if kbps < 0:
            raise RangeViolation(f"line {no}: negative throughput {kbps}")
        if delay < 0:
            raise RangeViolation(f"line {no}: negative delay {delay}")
        if jitter < 0:
            raise RangeViolation(f"line {no}: negative jitter {jitter}")
        if not 0.0 <= loss <= 1.0:
            raise RangeViolation(f"line {no}: loss_rate {loss} outside [0, 1]")
        samples.append(NetSample(t_ms=t_ms, throughput_bps=kbps_to_bps(kbps),
                                 delay_ms=delay, jitter_ms=jitter, loss_rate=loss))
    samples.sort(key=lambda s: s.t_ms)
    _check_uniform_grid(samples)
    return samples


def _check_uniform_grid(samples: list[NetSample]) -> int:
    if len(samples) < 2:
        return DEFAULT_DELTA_MS
    delta = samples[1].t_ms - samples[0].t_ms
    if delta <= 0:
        raise NonUniformGrid(f"non-positive gap {delta} at t_ms {samples[1].t_ms}")
    for prev, cur in zip(samples[1:], samples[2:]):
        gap = cur.t_ms - prev.t_ms
        if gap != delta:
            raise NonUniformGrid(
                f"gap {gap} at t_ms {cur.t_ms} differs from grid spacing {delta}"
            )
    return delta


def rebase_trace_pair(
    positions: list[PositionSample], net: list[NetSample]
) -> tuple[list[PositionSample], list[NetSample]]:
    """Shift both traces by one common epoch so timestamps start near zero.

    The epoch is the earliest timestamp in either trace; both traces get the
    same shift so their relative timing (they come from one drive) survives.
    """
    if not positions or not net:
        raise EmptyTrace("cannot rebase an empty trace pair")
    epoch = min(positions[0].t_ms, net[0].t_ms)
    if epoch == 0:
        return positions, net
    positions = [PositionSample(p.t_ms - epoch, p.lat_deg, p.lon_deg) for p in positions]
    net = [NetSample(n.t_ms - epoch, n.throughput_bps, n.delay_ms, n.jitter_ms, n.loss_rate)
           for n in net]
    return positions, net


def format_kbps(bps: float) -> str:
    """kbps with up to 3 decimals (1 bps resolution), trailing zeros trimmed."""
    text = f"{bps / 1000.0:.3f}".rstrip("0").rstrip(".")
    return text if text else "0"


def kbps_to_bps(kbps: float) -> float:
    # files carry at most 3 kbps decimals, so bps values are whole numbers;
    # rounding absorbs the *1000 float artifact
    return round(kbps * 1000.0, 3)


def write_scenario_csv(scenario: Scenario) -> str:
    lines = [SCENARIO_HEADER]
    for row in scenario.rows:
        lines.append(
            f"{row.t_ms},{row.lat_deg:.6f},{row.lon_deg:.6f},"
            f"{format_kbps(row.throughput_bps)},{row.delay_ms:.3f},"
            f"{row.jitter_ms:.3f},{row.loss_rate:.6f},{int(row.corrected)}"
        )
    return "\n".join(lines) + "\n"


def read_scenario_csv(text: str, path_id: str = "path0") -> Scenario:
    """Parse a scenario file; the path id comes from the topology config.

    A single-row file cannot carry its grid spacing, so the default of
    50 ms is assumed there.
    """
    lines = _check_header(_data_lines(text), SCENARIO_HEADER)
    if not lines:
        raise GridViolation("scenario file has no data rows")
    rows = []
    for no, line in lines:
        parts = line.split(",")
        if len(parts) != 8:
            raise MalformedRow(no, f"expected 8 fields, got {len(parts)}")
        t_ms = _parse_int(parts[0], no, "ts_ms")
        lat = _parse_float(parts[1], no, "lat")
        lon = _parse_float(parts[2], no, "lon")
        kbps = _parse_float(parts[3], no, "throughput_kbps")
        delay = _parse_float(parts[4], no, "delay_ms")
        jitter = _parse_float(parts[5], no, "jitter_ms")
        loss = _parse_float(parts[6], no, "loss_rate")
        if parts[7] not in ("0", "1"):
            raise MalformedRow(no, f"corrected must be 0 or 1, got {parts[7]!r}")
        rows.append(ScenarioRow(
            t_ms=t_ms, lat_deg=lat, lon_deg=lon, throughput_bps=kbps_to_bps(kbps),
            delay_ms=delay, jitter_ms=jitter, loss_rate=loss,
            corrected=parts[7] == "1",
        ))
    if len(rows) >= 2:
        delta = rows[1].t_ms - rows[0].t_ms
        if delta <= 0:
            raise GridViolation(f"non-positive grid spacing {delta}")
        for prev, cur in zip(rows[1:], rows[2:]):
            if cur.t_ms - prev.t_ms != delta:
                raise GridViolation(
                    f"gap {cur.t_ms - prev.t_ms} at t_ms {cur.t_ms} differs from "
                    f"grid spacing {delta}"
                )
    else:
        delta = DEFAULT_DELTA_MS
    return Scenario(path_id=path_id, delta_ms=delta, rows=tuple(rows))
