"""Built-in ground-truth pipeline for the delay-correction experiment.

A link with known capacity (steady 5 Mbps, one 2 s dip to 0.5 Mbps) and a
pure 30 ms propagation delay plays the role of the real network; a 1 Mbps
CBR probe measured through it produces the "field" reports, whose delay
spike during the dip is entirely queue-induced and therefore known ground
truth.  Replaying those reports verbatim re-creates the queuing on top of
the recorded delay (double counting); replaying the corrected scenario does
not.  The pipeline is fully deterministic given its seeds.

The probe uses 625-byte packets here so that the dip's drain rate is a whole
number of packets per reporting interval (0.5 Mbps = exactly one packet per
10 ms): per-interval throughput then sits cleanly on one side of the 0.7 Mbps
flag threshold instead of flickering around it through packet quantization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .emulator import EmulatedLink, LinkConfig, LinkParams, run_sequence
from .model import CorrectionParams, PositionSample, Scenario
from .orchestrator import PathSpec, TopologyConfig, run_replay
from .pipeline import align, correct_delay
from .probe import (
    ProbeConfig,
    ProbeReport,
    aggregate,
    reports_to_net_samples,
    schedule_packets,
    send_schedule,
    write_reports_csv,
)
from .ingest import write_scenario_csv
from .report import ComparisonResult, compare, export_plot_data


@dataclass(frozen=True)
class OracleConfig:
    duration_ms: int = 60_000
    steady_rate_bps: float = 5_000_000.0
    dip_rate_bps: float = 500_000.0
    dip_start_ms: int = 10_000
    dip_len_ms: int = 2_000
    propagation_ms: float = 30.0
    probe: ProbeConfig = field(default_factory=lambda: ProbeConfig(
        offered_load_bps=1_000_000.0, packet_size_bytes=625,
        report_interval_ms=50, duration_ms=60_000, seed=7))
    correction: CorrectionParams = field(default_factory=CorrectionParams)
    window_tail_ms: int = 2_000
    seed: int = 7


@dataclass
class OracleResult:
    field_reports: list[ProbeReport]
    raw_scenario: Scenario
    corrected_scenario: Scenario
    intervals: list
    raw_reports: list[ProbeReport]
    corrected_reports: list[ProbeReport]
    congestion_window: tuple[int, int]
    comparison: ComparisonResult


def _ground_truth_reports(cfg: OracleConfig) -> list[ProbeReport]:
    """Probe the known-capacity link; its delay spike is pure queuing."""
    link = EmulatedLink(config=LinkConfig(rng_seed=cfg.seed))
    steady = LinkParams(rate_bps=cfg.steady_rate_bps,
                        base_delay_ms=cfg.propagation_ms)
    dip = LinkParams(rate_bps=cfg.dip_rate_bps, base_delay_ms=cfg.propagation_ms)
    changes = [
        (0.0, steady),
        (float(cfg.dip_start_ms), dip),
        (float(cfg.dip_start_ms + cfg.dip_len_ms), steady),
    ]
    packets = schedule_packets(cfg.probe)
    events = run_sequence(link, changes, packets, horizon_ms=cfg.duration_ms + 5000.0)
    return aggregate(send_schedule(cfg.probe), events, cfg.probe)


def _synthetic_route(duration_ms: int) -> list[PositionSample]:
    """A straight 1 Hz route long enough to cover the run."""
    samples = []
    for i in range(duration_ms // 1000 + 2):
        samples.append(PositionSample(
            t_ms=i * 1000,
            lat_deg=35.65 + i * 1e-4,
            lon_deg=139.74 + i * 5e-5,
        ))
    return samples


def _replay_reports(scenario: Scenario, cfg: OracleConfig,
                    seed_offset: int) -> list[ProbeReport]:
    topo = TopologyConfig(paths=(PathSpec(
        path_id=scenario.path_id, scenario=scenario,
        link_config=LinkConfig(rng_seed=cfg.seed + seed_offset)),))
    result = run_replay(topo, workload=cfg.probe)
    return result.paths[scenario.path_id].reports


def run_oracle(cfg: OracleConfig | None = None,
               out_dir: str | Path | None = None) -> OracleResult:
    """Run field measurement, scenario build, correction, both replays, and
    the comparison; optionally write every artifact to out_dir."""
    cfg = cfg or OracleConfig()

    field_reports = _ground_truth_reports(cfg)
    net = reports_to_net_samples(field_reports)
    raw_scenario = align(_synthetic_route(cfg.duration_ms), net, path_id="oracle")
    corrected_scenario, intervals = correct_delay(raw_scenario, cfg.correction)

    raw_reports = _replay_reports(raw_scenario, cfg, seed_offset=1)
    corrected_reports = _replay_reports(corrected_scenario, cfg, seed_offset=2)

    if intervals:
        window = (min(iv.start_ms for iv in intervals),
                  max(iv.end_ms for iv in intervals) + cfg.window_tail_ms)
    else:
        window = (cfg.dip_start_ms,
                  cfg.dip_start_ms + cfg.dip_len_ms + cfg.window_tail_ms)
    comparison = compare(field_reports, raw_reports, corrected_reports, window)

    result = OracleResult(
        field_reports=field_reports,
        raw_scenario=raw_scenario,
        corrected_scenario=corrected_scenario,
        intervals=intervals,
        raw_reports=raw_reports,
        corrected_reports=corrected_reports,
        congestion_window=window,
        comparison=comparison,
    )
    if out_dir is not None:
        write_oracle_outputs(result, Path(out_dir))
    return result


def write_oracle_outputs(result: OracleResult, out_dir: Path) -> None:
    import json

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "field_reports.csv").write_text(write_reports_csv(result.field_reports))
    (out_dir / "raw_scenario.csv").write_text(write_scenario_csv(result.raw_scenario))
    (out_dir / "corrected_scenario.csv").write_text(
        write_scenario_csv(result.corrected_scenario))
    (out_dir / "raw_replay_reports.csv").write_text(
        write_reports_csv(result.raw_reports))
    (out_dir / "corrected_replay_reports.csv").write_text(
        write_reports_csv(result.corrected_reports))
    intervals = [
        {"start_ms": iv.start_ms, "end_ms": iv.end_ms,
         "replacement_delay_ms": iv.replacement_delay_ms,
         "replacement_jitter_ms": iv.replacement_jitter_ms,
         "window_sample_count": iv.window_sample_count}
        for iv in result.intervals
    ]
    (out_dir / "intervals.json").write_text(json.dumps(intervals, indent=2) + "\n")
    (out_dir / "comparison.json").write_text(result.comparison.to_json())
    (out_dir / "plot.csv").write_text(export_plot_data(result.comparison))
