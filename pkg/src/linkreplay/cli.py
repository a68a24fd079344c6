"""Command-line entry point chaining the pipeline:
ingest -> align -> correct -> replay -> probe -> report -> serve.

Threshold flags take human units (kbps / ms) and convert internally.
Exit codes: 0 success, 1 runtime failure, 2 invalid input; failures print a
single machine-parseable line prefixed with ``error:``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import InputError, LinkReplayError
from .ingest import (
    parse_net_csv,
    parse_position_csv,
    read_scenario_csv,
    rebase_trace_pair,
    write_scenario_csv,
)
from .model import CorrectionParams, validate_scenario
from .oracle import OracleConfig, run_oracle
from .orchestrator import (
    PathSpec,
    ReplaySession,
    TopologyConfig,
    load_topology,
    run_replay,
)
from .pipeline import align as align_traces
from .pipeline import correct_delay
from .probe import ProbeConfig, read_reports_csv, write_reports_csv
from .report import compare, export_plot_data


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linkreplay",
        description="Trace-driven cellular-link replay testbed.",
    )
    parser.add_argument("--seed", type=int, default=0,
                        help="base RNG seed for links and probes (default 0)")
    parser.add_argument("--verbose", action="store_true",
                        help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="fuse position and network traces into a scenario")
    p.add_argument("--positions", required=True, help="position trace CSV (ts_ms,lat,lon)")
    p.add_argument("--net", required=True,
                   help="network trace CSV (ts_ms,throughput_kbps,delay_ms,jitter_ms,loss_rate)")
    p.add_argument("--out", required=True, help="scenario CSV to write")
    p.add_argument("--path-id", default="path0", help="path identifier (default path0)")

    p = sub.add_parser("correct", help="apply congestion-induced delay correction")
    p.add_argument("--scenario", required=True, help="scenario CSV to correct")
    p.add_argument("--b-th", type=float, default=700.0,
                   help="throughput flag threshold in kbps (default 700)")
    p.add_argument("--d-th", type=float, default=50.0,
                   help="delay flag threshold in ms (default 50)")
    p.add_argument("--t-th", type=int, default=250,
                   help="minimum flagged duration in ms (default 250)")
    p.add_argument("--t-adj", type=int, default=1000,
                   help="averaging window length in ms (default 1000)")
    p.add_argument("--out", required=True, help="corrected scenario CSV to write")
    p.add_argument("--intervals-out", help="JSON file for the correction intervals")

    p = sub.add_parser("replay", help="replay a topology, optionally with a probe workload")
    p.add_argument("--topology", required=True, help="topology config JSON")
    p.add_argument("--probe", action="store_true", help="drive a CBR probe through each path")
    p.add_argument("--duration", type=int, default=30_000,
                   help="probe duration in ms (default 30000)")
    p.add_argument("--load", type=float, default=1000.0,
                   help="probe offered load in kbps (default 1000)")
    p.add_argument("--packet-size", type=int, default=1250,
                   help="probe packet size in bytes (default 1250)")
    p.add_argument("--reports-out", help="probe report CSV (per-path suffix when multipath)")
    p.add_argument("--mode", choices=["simulated", "udp-proxy", "tc-script"],
                   help="override the topology's backend mode")
    p.add_argument("--wall", action="store_true",
                   help="use the wall clock (default: simulated virtual clock)")
    p.add_argument("--out-dir", help="output directory for tc-script mode")

    p = sub.add_parser("compare", help="compare field vs raw vs corrected report series")
    p.add_argument("--field", required=True, help="field report CSV")
    p.add_argument("--raw", required=True, help="raw-replay report CSV")
    p.add_argument("--corrected", required=True, help="corrected-replay report CSV")
    p.add_argument("--out", required=True, help="comparison JSON to write")
    p.add_argument("--plot-out", help="plot-data CSV (default: --out with .csv suffix)")
    p.add_argument("--window-start", type=int, help="congestion window start (ms)")
    p.add_argument("--window-end", type=int, help="congestion window end (ms)")

    p = sub.add_parser("oracle", help="run the built-in ground-truth pipeline end to end")
    p.add_argument("--out-dir", required=True, help="directory for all pipeline artifacts")

    p = sub.add_parser("serve", help="serve the replay control API")
    p.add_argument("--topology", required=True, help="topology config JSON")
    p.add_argument("--bind", default="127.0.0.1:8000", help="addr:port to bind")
    p.add_argument("--probe", action="store_true", help="drive a CBR probe during replay")
    p.add_argument("--duration", type=int, default=30_000, help="probe duration in ms")

    return parser


def _cmd_align(args) -> int:
    positions = parse_position_csv(Path(args.positions).read_text())
    net = parse_net_csv(Path(args.net).read_text())
    positions, net = rebase_trace_pair(positions, net)
    scenario = align_traces(positions, net, path_id=args.path_id)
    violations = validate_scenario(scenario)
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        print(f"error: scenario validation failed with {len(violations)} violation(s)",
              file=sys.stderr)
        return 2
    Path(args.out).write_text(write_scenario_csv(scenario))
    print(f"wrote {len(scenario.rows)} rows to {args.out}")
    return 0


def _cmd_correct(args) -> int:
    scenario = read_scenario_csv(Path(args.scenario).read_text())
    params = CorrectionParams(b_th_bps=args.b_th * 1000.0, d_th_ms=args.d_th,
                              t_th_ms=args.t_th, t_adj_ms=args.t_adj)
    corrected, intervals = correct_delay(scenario, params)
    Path(args.out).write_text(write_scenario_csv(corrected))
    if args.intervals_out:
        payload = [{"start_ms": iv.start_ms, "end_ms": iv.end_ms,
                    "replacement_delay_ms": iv.replacement_delay_ms,
                    "replacement_jitter_ms": iv.replacement_jitter_ms,
                    "window_sample_count": iv.window_sample_count}
                   for iv in intervals]
        Path(args.intervals_out).write_text(json.dumps(payload, indent=2) + "\n")
    print(f"corrected {sum(r.corrected for r in corrected.rows)} rows in "
          f"{len(intervals)} interval(s)")
    return 0


def _apply_seed(cfg: TopologyConfig, base_seed: int) -> TopologyConfig:
    paths = tuple(
        PathSpec(p.path_id, p.scenario,
                 replace(p.link_config, rng_seed=p.link_config.rng_seed or base_seed + i))
        for i, p in enumerate(cfg.paths))
    return TopologyConfig(paths=paths, mode=cfg.mode, clock=cfg.clock,
                          position_stream_hz=cfg.position_stream_hz,
                          endpoints=cfg.endpoints)


def _cmd_replay(args, seed: int) -> int:
    cfg = load_topology(args.topology)
    mode = (args.mode or cfg.mode).replace("-", "_")
    clock = "wall" if (args.wall or mode == "udp_proxy") else (
        "none" if mode == "tc_script" else "virtual")
    cfg = TopologyConfig(paths=cfg.paths, mode=mode, clock=clock,
                         position_stream_hz=cfg.position_stream_hz,
                         endpoints=cfg.endpoints)
    cfg = _apply_seed(cfg, seed)

    workload = None
    if args.probe:
        workload = ProbeConfig(offered_load_bps=args.load * 1000.0,
                               packet_size_bytes=args.packet_size,
                               duration_ms=args.duration, seed=seed)
    result = run_replay(cfg, workload)

    if mode == "tc_script":
        out_dir = Path(args.out_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        for path_id, script in result.tc_scripts.items():
            target = out_dir / f"{path_id}.sh"
            target.write_text(script)
            print(f"wrote {target}")
        return 0

    if args.reports_out:
        out = Path(args.reports_out)
        for path_id, path_result in result.paths.items():
            target = out if len(result.paths) == 1 else \
                out.with_name(f"{out.stem}_{path_id}{out.suffix}")
            target.write_text(write_reports_csv(path_result.reports))
            print(f"wrote {len(path_result.reports)} reports to {target}")
    else:
        for path_id, path_result in result.paths.items():
            delivered = sum(1 for e in path_result.events if not e.dropped)
            print(f"{path_id}: {len(path_result.sends)} sent, {delivered} delivered, "
                  f"{len(path_result.reports)} report intervals")
    return 0


def _cmd_compare(args) -> int:
    field = read_reports_csv(Path(args.field).read_text())
    raw = read_reports_csv(Path(args.raw).read_text())
    corrected = read_reports_csv(Path(args.corrected).read_text())
    start = args.window_start if args.window_start is not None else field[0].t_ms
    end = args.window_end if args.window_end is not None else field[-1].t_ms
    result = compare(field, raw, corrected, (start, end))
    Path(args.out).write_text(result.to_json())
    plot_out = Path(args.plot_out) if args.plot_out else Path(args.out).with_suffix(".csv")
    plot_out.write_text(export_plot_data(result))
    verdict = "tie" if result.tie else (
        "corrected tracks better" if result.corrected_tracks_better else
        "raw tracks better")
    print(f"window delay MAE: raw={result.window_mae_delay_raw_ms:.3f} ms, "
          f"corrected={result.window_mae_delay_corrected_ms:.3f} ms ({verdict})")
    return 0


def _cmd_oracle(args, seed: int) -> int:
    cfg = OracleConfig(seed=seed or OracleConfig().seed)
    result = run_oracle(cfg, out_dir=args.out_dir)
    c = result.comparison
    print(f"intervals: {len(result.intervals)}; window {result.congestion_window}")
    print(f"window delay MAE: raw={c.window_mae_delay_raw_ms:.3f} ms, "
          f"corrected={c.window_mae_delay_corrected_ms:.3f} ms, "
          f"verdict corrected_tracks_better={c.corrected_tracks_better}")
    return 0


def _cmd_serve(args, seed: int) -> int:
    import uvicorn

    from .api import create_app

    cfg = load_topology(args.topology)
    cfg = _apply_seed(cfg, seed)
    workload = None
    if args.probe:
        workload = ProbeConfig(duration_ms=args.duration, seed=seed)
    session = ReplaySession(cfg, workload=workload, paced=True)
    app = create_app(session)
    host, _, port = args.bind.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "align":
            return _cmd_align(args)
        if args.command == "correct":
            return _cmd_correct(args)
        if args.command == "replay":
            return _cmd_replay(args, args.seed)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "oracle":
            return _cmd_oracle(args, args.seed)
        if args.command == "serve":
            return _cmd_serve(args, args.seed)
        raise AssertionError(f"unhandled command {args.command}")
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LinkReplayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
