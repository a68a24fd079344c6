"""Scenario building: trace alignment and congestion-induced delay correction.

Field delay measurements taken with a CBR probe already contain the queuing
delay the probe itself induced.  Replaying them verbatim on top of a rate
shaper regenerates that queuing and double-counts it.  ``correct_delay``
removes it: it flags samples where throughput sits below a threshold while
delay sits above one, and replaces delay/jitter inside sufficiently long
flagged runs with the average of the neighbouring unflagged windows.  The
shaper then re-creates the queuing delay on its own, while the configured
delay keeps only the propagation component.
"""

from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import replace
from statistics import fmean

from .errors import EmptyInput, GridMismatch
from .model import (
    CorrectionInterval,
    CorrectionParams,
    NetSample,
    PositionSample,
    Scenario,
    ScenarioRow,
)

logger = logging.getLogger(__name__)


def _position_at(positions: list[PositionSample], t_ms: int) -> tuple[float, float]:
    """Linear interpolation, clamped to the endpoints outside the span."""
    if t_ms <= positions[0].t_ms:
        return positions[0].lat_deg, positions[0].lon_deg
    if t_ms >= positions[-1].t_ms:
        return positions[-1].lat_deg, positions[-1].lon_deg
    times = [p.t_ms for p in positions]
    hi = bisect_right(times, t_ms)
    lo = hi - 1
    a, b = positions[lo], positions[hi]
    if t_ms == a.t_ms:
        return a.lat_deg, a.lon_deg
    alpha = (t_ms - a.t_ms) / (b.t_ms - a.t_ms)
    lat = a.lat_deg + alpha * (b.lat_deg - a.lat_deg)
    lon = a.lon_deg + alpha * (b.lon_deg - a.lon_deg)
    return lat, lon


def align(positions: list[PositionSample], net: list[NetSample],
          path_id: str = "path0") -> Scenario:
    """Fuse a position trace with a network trace on the network grid.

    Emits one scenario row per network sample, at that sample's timestamp,
    with the position linearly interpolated (clamped beyond the position
    trace's span).  Network fields are copied verbatim.
    """
    if not positions:
        raise EmptyInput("position trace is empty")
    if not net:
        raise EmptyInput("network trace is empty")

    if net[-1].t_ms < positions[0].t_ms or net[0].t_ms > positions[-1].t_ms:
        logger.warning(
            "position trace [%d, %d] and network trace [%d, %d] do not overlap; "
            "all positions will be clamped to the nearest endpoint",
            positions[0].t_ms, positions[-1].t_ms, net[0].t_ms, net[-1].t_ms,
        )

    delta = net[1].t_ms - net[0].t_ms if len(net) >= 2 else 50
    rows = []
    for sample in net:
        lat, lon = _position_at(positions, sample.t_ms)
        rows.append(ScenarioRow(
            t_ms=sample.t_ms, lat_deg=lat, lon_deg=lon,
            throughput_bps=sample.throughput_bps, delay_ms=sample.delay_ms,
            jitter_ms=sample.jitter_ms, loss_rate=sample.loss_rate,
            corrected=False,
        ))
    return Scenario(path_id=path_id, delta_ms=delta, rows=tuple(rows))


def _flagged_runs(flags: list[bool]) -> list[tuple[int, int]]:
    """Maximal runs of consecutive True values, as inclusive index pairs."""
    runs = []
    start = None
    for i, f in enumerate(flags):
        if f and start is None:
            start = i
        elif not f and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(flags) - 1))
    return runs


def correct_delay(scenario: Scenario, params: CorrectionParams,
                  ) -> tuple[Scenario, list[CorrectionInterval]]:
    """Apply the congestion-induced delay correction.

    A sample is flagged iff throughput < b_th AND delay > d_th (both strict).
    Maximal flagged runs lasting at least t_th become correction intervals;
    each interval's delay and jitter are replaced by the plain mean over the
    t_adj-long windows directly before and after it, excluding samples that
    belong to any qualifying run.  Throughput, loss, position and timestamps
    are never touched.  An interval whose both windows are empty is left
    unmodified and reported with window_sample_count=0.
    """
    delta = scenario.delta_ms
    if params.t_th_ms % delta != 0:
        raise GridMismatch(f"t_th_ms {params.t_th_ms} is not a multiple of delta_ms {delta}")
    if params.t_adj_ms % delta != 0:
        raise GridMismatch(f"t_adj_ms {params.t_adj_ms} is not a multiple of delta_ms {delta}")

    rows = scenario.rows
    flags = [r.throughput_bps < params.b_th_bps and r.delay_ms > params.d_th_ms
             for r in rows]
    min_len = params.t_th_ms // delta
    qualifying = [(a, b) for a, b in _flagged_runs(flags) if (b - a + 1) >= min_len]

    members = set()
    for a, b in qualifying:
        members.update(range(a, b + 1))

    window_len = params.t_adj_ms // delta
    new_rows = list(rows)
    intervals = []
    for a, b in qualifying:
        pre = [k for k in range(max(a - window_len, 0), a) if k not in members]
        post = [k for k in range(b + 1, min(b + 1 + window_len, len(rows)))
                if k not in members]
        picked = pre + post
        if picked:
            repl_delay = fmean(rows[k].delay_ms for k in picked)
            repl_jitter = fmean(rows[k].jitter_ms for k in picked)
            for k in range(a, b + 1):
                new_rows[k] = replace(rows[k], delay_ms=repl_delay,
                                      jitter_ms=repl_jitter, corrected=True)
        else:
            repl_delay = 0.0
            repl_jitter = 0.0
        intervals.append(CorrectionInterval(
            start_ms=rows[a].t_ms, end_ms=rows[b].t_ms,
            replacement_delay_ms=repl_delay, replacement_jitter_ms=repl_jitter,
            window_sample_count=len(picked),
        ))

    corrected = Scenario(path_id=scenario.path_id, delta_ms=delta, rows=tuple(new_rows))
    return corrected, intervals
