import pytest

from linkreplay.emulator import (
    UNLIMITED,
    EgressEvent,
    EmulatedLink,
    LinkConfig,
    LinkParams,
    Packet,
)
from linkreplay.probe import (
    ProbeConfig,
    aggregate,
    read_reports_csv,
    reports_to_net_samples,
    schedule_packets,
    send_schedule,
    write_reports_csv,
)

from oracles import smoothed_jitter


class TestSendSchedule:
    def test_default_spacing_is_10ms(self):
        cfg = ProbeConfig(duration_ms=1000)
        sends = send_schedule(cfg)
        assert len(sends) == 100
        assert sends[1].send_ts_ms - sends[0].send_ts_ms == pytest.approx(10.0)

    def test_50ms_duration_gives_five_packets(self):
        sends = send_schedule(ProbeConfig(duration_ms=50))
        assert [s.send_ts_ms for s in sends] == [0.0, 10.0, 20.0, 30.0, 40.0]
        assert [s.seq for s in sends] == [0, 1, 2, 3, 4]

    def test_2mbps_spacing_is_5ms(self):
        sends = send_schedule(ProbeConfig(offered_load_bps=2_000_000.0, duration_ms=100))
        assert sends[1].send_ts_ms == pytest.approx(5.0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ProbeConfig(packet_size_bytes=10)
        with pytest.raises(ValueError):
            ProbeConfig(offered_load_bps=0)


def run_probe(link_params, cfg, seed=0):
    link = EmulatedLink(config=LinkConfig(rng_seed=seed), params=link_params)
    sends = send_schedule(cfg)
    for p in schedule_packets(cfg):
        link.ingress(p)
    events = link.run_until(cfg.duration_ms + 10_000.0)
    return sends, events


class TestAggregate:
    def test_full_interval_throughput(self):
        cfg = ProbeConfig(duration_ms=50)
        sends = send_schedule(cfg)
        events = [EgressEvent(Packet(seq=s.seq, size_bytes=s.size_bytes,
                                     ingress_ts_ms=s.send_ts_ms),
                              egress_ts_ms=s.send_ts_ms) for s in sends]
        (report,) = aggregate(sends, events, cfg)
        assert report.throughput_bps == pytest.approx(1_000_000.0)
        assert report.packets_received == 5
        assert report.packets_expected == 5
        assert report.loss_rate == 0.0

    def test_constant_delay_reports_it_and_jitter_decays(self):
        cfg = ProbeConfig(duration_ms=2000)
        sends, events = run_probe(LinkParams(rate_bps=5_000_000.0, base_delay_ms=30.0),
                                  cfg)
        reports = aggregate(sends, events, cfg)
        assert all(r.mean_delay_ms == pytest.approx(32.0) for r in reports)
        assert reports[-1].jitter_ms == pytest.approx(0.0)

    def test_jitter_recurrence_matches_reference(self):
        # alternating 30/34 ms delays over 64 packets
        cfg = ProbeConfig(duration_ms=640)
        sends = send_schedule(cfg)
        delays = [30.0 if i % 2 == 0 else 34.0 for i in range(64)]
        events = [EgressEvent(Packet(seq=s.seq, size_bytes=s.size_bytes,
                                     ingress_ts_ms=s.send_ts_ms),
                              egress_ts_ms=s.send_ts_ms + delays[i])
                  for i, s in enumerate(sends)]
        events.sort(key=lambda e: e.egress_ts_ms)
        reports = aggregate(sends, events, cfg)
        expected = smoothed_jitter(delays)
        assert expected == pytest.approx(4.0 * (1.0 - (15.0 / 16.0) ** 63), rel=1e-9)
        assert reports[-1].jitter_ms == pytest.approx(expected, rel=1e-12)

    def test_offered_load_identity_through_identity_link(self):
        cfg = ProbeConfig(duration_ms=3000)
        sends, events = run_probe(LinkParams(rate_bps=UNLIMITED), cfg)
        reports = aggregate(sends, events, cfg)
        assert len(reports) == 60
        quantum = 1250 * 8 * 1000.0 / cfg.report_interval_ms
        for r in reports:
            assert abs(r.throughput_bps - 1_000_000.0) <= quantum
            assert r.loss_rate == 0.0
            assert r.mean_delay_ms == 0.0

    def test_loss_accounting_sums_to_total_sent(self):
        cfg = ProbeConfig(duration_ms=5000)
        sends, events = run_probe(LinkParams(rate_bps=UNLIMITED, loss_rate=0.3),
                                  cfg, seed=11)
        reports = aggregate(sends, events, cfg)
        received = sum(r.packets_received for r in reports)
        expected = sum(r.packets_expected for r in reports)
        assert expected == len(sends)
        assert received == sum(1 for e in events if not e.dropped)
        for r in reports:
            assert r.loss_rate == pytest.approx(
                1.0 - r.packets_received / r.packets_expected)

    def test_total_loss_intervals_still_reported(self):
        cfg = ProbeConfig(duration_ms=200)
        sends, events = run_probe(LinkParams(rate_bps=UNLIMITED, loss_rate=1.0), cfg)
        reports = aggregate(sends, events, cfg)
        assert len(reports) == 4
        assert all(r.loss_rate == 1.0 for r in reports)
        assert all(r.packets_received == 0 for r in reports)

    def test_bucketing_is_normalized_by_min_delay(self):
        # constant 32 ms transport: every interval keeps its full 5 packets
        cfg = ProbeConfig(duration_ms=1000)
        sends, events = run_probe(LinkParams(rate_bps=5_000_000.0, base_delay_ms=30.0),
                                  cfg)
        reports = aggregate(sends, events, cfg)
        assert len(reports) == 20
        assert all(r.throughput_bps == pytest.approx(1_000_000.0) for r in reports)

    def test_normalize_delay_subtracts_floor(self):
        cfg = ProbeConfig(duration_ms=500)
        sends, events = run_probe(LinkParams(rate_bps=5_000_000.0, base_delay_ms=30.0),
                                  cfg)
        reports = aggregate(sends, events, cfg, normalize_delay=True)
        assert all(r.mean_delay_ms == pytest.approx(0.0) for r in reports)

    def test_empty_interval_carries_previous_delay(self):
        cfg = ProbeConfig(duration_ms=100)
        sends = send_schedule(cfg)
        # only the first two packets arrive, nothing in the second interval
        events = [EgressEvent(Packet(seq=s.seq, size_bytes=s.size_bytes,
                                     ingress_ts_ms=s.send_ts_ms),
                              egress_ts_ms=s.send_ts_ms + 5.0)
                  for s in sends[:2]]
        events += [EgressEvent(Packet(seq=s.seq, size_bytes=s.size_bytes,
                                      ingress_ts_ms=s.send_ts_ms),
                               egress_ts_ms=s.send_ts_ms, dropped=True,
                               drop_reason="loss_draw") for s in sends[2:]]
        events.sort(key=lambda e: e.egress_ts_ms)
        reports = aggregate(sends, events, cfg)
        assert reports[1].packets_received == 0
        assert reports[1].mean_delay_ms == reports[0].mean_delay_ms


class TestReportCsv:
    def test_round_trip(self):
        cfg = ProbeConfig(duration_ms=1000)
        sends, events = run_probe(LinkParams(rate_bps=5_000_000.0, base_delay_ms=30.0,
                                             jitter_ms=1.0), cfg, seed=2)
        reports = aggregate(sends, events, cfg)
        text = write_reports_csv(reports)
        parsed = read_reports_csv(text)
        assert len(parsed) == len(reports)
        assert write_reports_csv(parsed) == text

    def test_reports_convert_to_net_samples(self):
        cfg = ProbeConfig(duration_ms=1000)
        sends, events = run_probe(LinkParams(rate_bps=5_000_000.0, base_delay_ms=30.0),
                                  cfg)
        reports = aggregate(sends, events, cfg)
        net = reports_to_net_samples(reports)
        assert len(net) == len(reports)
        assert net[0].t_ms == reports[0].t_ms
        assert net[0].throughput_bps == reports[0].throughput_bps
