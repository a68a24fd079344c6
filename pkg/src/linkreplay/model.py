"""Core domain types shared by every stage of the replay pipeline.

Timestamps are integer milliseconds relative to a per-scenario epoch (the
first sample of the trace), never wall-clock dates.  Throughput is stored in
bits per second, loss as a fraction in [0, 1].  All types are immutable
values and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class PositionSample:
    """One GNSS fix from the (nominally 1 Hz) position trace."""

    t_ms: int
    lat_deg: float
    lon_deg: float


@dataclass(frozen=True)
class NetSample:
    """One row of the fixed-grid network-performance trace."""

    t_ms: int
    throughput_bps: float
    delay_ms: float
    jitter_ms: float
    loss_rate: float


@dataclass(frozen=True)
class ScenarioRow:
    """A network sample fused with the interpolated position at its time.

    ``corrected`` is True when the delay/jitter values were replaced by the
    congestion-correction pass.
    """

    t_ms: int
    lat_deg: float
    lon_deg: float
    throughput_bps: float
    delay_ms: float
    jitter_ms: float
    loss_rate: float
    corrected: bool = False


@dataclass(frozen=True)
class Scenario:
    """Time-aligned replay input for one cellular path."""

    path_id: str
    delta_ms: int
    rows: tuple[ScenarioRow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.rows, tuple):
            object.__setattr__(self, "rows", tuple(self.rows))

    @property
    def t_start_ms(self) -> int:
        return self.rows[0].t_ms

    @property
    def t_end_ms(self) -> int:
        return self.rows[-1].t_ms

    def row_index_at(self, t_ms: int) -> int:
        """Index of the row whose hold interval [t, t+delta) contains t_ms."""
        return min(max((t_ms - self.t_start_ms) // self.delta_ms, 0),
                   len(self.rows) - 1)

    def row_at(self, t_ms: int) -> ScenarioRow:
        return self.rows[self.row_index_at(t_ms)]


@dataclass(frozen=True)
class CorrectionParams:
    """Thresholds of the congestion-induced delay correction.

    Defaults: flag samples with throughput below 0.7 Mbps and delay above
    50 ms, keep runs of at least 250 ms, average over 1 s windows.
    """

    b_th_bps: float = 700_000.0
    d_th_ms: float = 50.0
    t_th_ms: int = 250
    t_adj_ms: int = 1000

    def __post_init__(self):
        for name in ("b_th_bps", "d_th_ms", "t_th_ms", "t_adj_ms"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class CorrectionInterval:
    """A flagged run whose delay/jitter were replaced by window averages.

    ``start_ms``/``end_ms`` are the inclusive grid timestamps of the run.
    ``window_sample_count`` is the number of samples that went into the
    averages; 0 means both windows were empty and the run was left unmodified.
    """

    start_ms: int
    end_ms: int
    replacement_delay_ms: float
    replacement_jitter_ms: float
    window_sample_count: int


def _check_finite(violations: list[str], index: int, name: str, value: float) -> bool:
    if not math.isfinite(value):
        violations.append(f"row {index}: {name} is not finite")
        return False
    return True


def validate_scenario(scenario: Scenario) -> list[str]:
    """Check every type invariant; returns one description per violation.

    Violations are data, not failures: an empty list means the scenario is
    well formed.
    """
    violations: list[str] = []
    if not scenario.rows:
        violations.append("scenario has no rows")
        return violations
    if scenario.delta_ms <= 0:
        violations.append(f"delta_ms must be positive, got {scenario.delta_ms}")

    prev_t = None
    for i, row in enumerate(scenario.rows):
        if _check_finite(violations, i, "lat_deg", row.lat_deg) and not -90.0 <= row.lat_deg <= 90.0:
            violations.append(f"row {i}: lat_deg {row.lat_deg} outside [-90, 90]")
        if _check_finite(violations, i, "lon_deg", row.lon_deg) and not -180.0 <= row.lon_deg <= 180.0:
            violations.append(f"row {i}: lon_deg {row.lon_deg} outside [-180, 180]")
        if _check_finite(violations, i, "throughput_bps", row.throughput_bps) and row.throughput_bps < 0:
            violations.append(f"row {i}: throughput_bps {row.throughput_bps} is negative")
        if _check_finite(violations, i, "delay_ms", row.delay_ms) and row.delay_ms < 0:
            violations.append(f"row {i}: delay_ms {row.delay_ms} is negative")
        if _check_finite(violations, i, "jitter_ms", row.jitter_ms) and row.jitter_ms < 0:
            violations.append(f"row {i}: jitter_ms {row.jitter_ms} is negative")
        if _check_finite(violations, i, "loss_rate", row.loss_rate) and not 0.0 <= row.loss_rate <= 1.0:
            violations.append(f"row {i}: loss_rate {row.loss_rate} outside [0, 1]")
        if prev_t is not None and row.t_ms - prev_t != scenario.delta_ms:
            violations.append(
                f"row {i}: t_ms gap {row.t_ms - prev_t} != delta_ms {scenario.delta_ms}"
            )
        prev_t = row.t_ms
    return violations
