"""Quantitative comparison of probe report series: field vs raw vs corrected.

MAE is the headline metric (the claim under test is about tracking, and MAE
is robust to single-interval spikes); RMSE is carried along as a secondary
column.  The congestion window is the stretch over which the delay MAE is
additionally computed — by convention the correction intervals dilated by
2 s at the tail, where double-counted queuing shows up.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import sqrt
from statistics import fmean

from .errors import IntervalMismatch
from .ingest import format_kbps
from .probe import ProbeReport


@dataclass(frozen=True)
class JoinedReports:
    """Report series inner-joined on t_ms."""

    t_ms: tuple[int, ...]
    series: dict[str, tuple[ProbeReport, ...]]
    gaps: tuple[int, ...]  # timestamps present in some series but not all


def _interval_of(reports: list[ProbeReport]) -> int | None:
    if len(reports) < 2:
        return None
    return reports[1].t_ms - reports[0].t_ms


def join_reports(series: dict[str, list[ProbeReport]]) -> JoinedReports:
    """Inner join on t_ms; all series must share one reporting interval."""
    if not series:
        raise IntervalMismatch("no series given")
    intervals = {name: _interval_of(reports) for name, reports in series.items()}
    known = {w for w in intervals.values() if w is not None}
    if len(known) > 1:
        raise IntervalMismatch(f"reporting intervals differ: {intervals}")

    by_t = {name: {r.t_ms: r for r in reports} for name, reports in series.items()}
    all_ts = set()
    for table in by_t.values():
        all_ts.update(table)
    common = sorted(t for t in all_ts if all(t in table for table in by_t.values()))
    gaps = sorted(all_ts - set(common))
    joined = {name: tuple(by_t[name][t] for t in common) for name in series}
    return JoinedReports(t_ms=tuple(common), series=joined, gaps=tuple(gaps))


def mae(a: list[float], b: list[float]) -> float:
    if len(a) != len(b):
        raise IntervalMismatch(f"series lengths differ: {len(a)} vs {len(b)}")
    if not a:
        return 0.0
    return fmean(abs(x - y) for x, y in zip(a, b))


def rmse(a: list[float], b: list[float]) -> float:
    if len(a) != len(b):
        raise IntervalMismatch(f"series lengths differ: {len(a)} vs {len(b)}")
    if not a:
        return 0.0
    return sqrt(fmean((x - y) ** 2 for x, y in zip(a, b)))


@dataclass(frozen=True)
class ComparisonResult:
    joined: JoinedReports
    congestion_window: tuple[int, int]
    mae_delay_raw_ms: float
    mae_delay_corrected_ms: float
    mae_throughput_raw_bps: float
    mae_throughput_corrected_bps: float
    window_mae_delay_raw_ms: float
    window_mae_delay_corrected_ms: float
    rmse_delay_raw_ms: float
    rmse_delay_corrected_ms: float
    corrected_tracks_better: bool
    tie: bool

    def to_json(self) -> str:
        payload = {
            "congestion_window": {"start_ms": self.congestion_window[0],
                                  "end_ms": self.congestion_window[1]},
            "mae_delay_raw_ms": self.mae_delay_raw_ms,
            "mae_delay_corrected_ms": self.mae_delay_corrected_ms,
            "mae_throughput_raw_bps": self.mae_throughput_raw_bps,
            "mae_throughput_corrected_bps": self.mae_throughput_corrected_bps,
            "window_mae_delay_raw_ms": self.window_mae_delay_raw_ms,
            "window_mae_delay_corrected_ms": self.window_mae_delay_corrected_ms,
            "rmse_delay_raw_ms": self.rmse_delay_raw_ms,
            "rmse_delay_corrected_ms": self.rmse_delay_corrected_ms,
            "corrected_tracks_better": self.corrected_tracks_better,
            "tie": self.tie,
            "intervals_joined": len(self.joined.t_ms),
        }
        return json.dumps(payload, indent=2) + "\n"


def compare(field: list[ProbeReport], raw_replay: list[ProbeReport],
            corrected_replay: list[ProbeReport], window: tuple[int, int],
            ) -> ComparisonResult:
    """MAE of each replay against the field series, full span and in-window.

    The verdict compares delay MAE over the congestion window; equal MAEs are
    flagged as a tie (and the verdict is False).
    """
    joined = join_reports({"field": field, "raw": raw_replay,
                           "corrected": corrected_replay})
    f = joined.series["field"]
    r = joined.series["raw"]
    c = joined.series["corrected"]

    f_delay = [x.mean_delay_ms for x in f]
    r_delay = [x.mean_delay_ms for x in r]
    c_delay = [x.mean_delay_ms for x in c]
    f_tput = [x.throughput_bps for x in f]
    r_tput = [x.throughput_bps for x in r]
    c_tput = [x.throughput_bps for x in c]

    start, end = window
    in_w = [i for i, t in enumerate(joined.t_ms) if start <= t <= end]
    fw = [f_delay[i] for i in in_w]
    rw = [r_delay[i] for i in in_w]
    cw = [c_delay[i] for i in in_w]

    window_raw = mae(rw, fw)
    window_corrected = mae(cw, fw)
    tie = window_raw == window_corrected
    return ComparisonResult(
        joined=joined,
        congestion_window=(start, end),
        mae_delay_raw_ms=mae(r_delay, f_delay),
        mae_delay_corrected_ms=mae(c_delay, f_delay),
        mae_throughput_raw_bps=mae(r_tput, f_tput),
        mae_throughput_corrected_bps=mae(c_tput, f_tput),
        window_mae_delay_raw_ms=window_raw,
        window_mae_delay_corrected_ms=window_corrected,
        rmse_delay_raw_ms=rmse(r_delay, f_delay),
        rmse_delay_corrected_ms=rmse(c_delay, f_delay),
        corrected_tracks_better=window_corrected < window_raw,
        tie=tie,
    )


PLOT_HEADER = "ts_ms,series,metric,value"


def export_plot_data(result: ComparisonResult) -> str:
    """Long-format CSV of the joined series, one row per (t, series, metric)."""
    lines = [PLOT_HEADER]
    for i, t in enumerate(result.joined.t_ms):
        for name in ("field", "raw", "corrected"):
            report = result.joined.series[name][i]
            lines.append(f"{t},{name},throughput_kbps,{format_kbps(report.throughput_bps)}")
            lines.append(f"{t},{name},delay_ms,{report.mean_delay_ms:.3f}")
    return "\n".join(lines) + "\n"
