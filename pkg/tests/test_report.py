import pytest

from linkreplay.errors import IntervalMismatch
from linkreplay.probe import ProbeReport, read_reports_csv
from linkreplay.report import (
    compare,
    export_plot_data,
    join_reports,
    mae,
    rmse,
)


def series(deltas, interval=50, delay=30.0, tput=1_000_000.0, t0=0):
    return [ProbeReport(t_ms=t0 + i * interval, throughput_bps=tput,
                        mean_delay_ms=delay + d, jitter_ms=1.0, loss_rate=0.0,
                        packets_received=5, packets_expected=5)
            for i, d in enumerate(deltas)]


class TestJoin:
    def test_identical_series_join_fully(self):
        a = series([0.0] * 10)
        joined = join_reports({"a": a, "b": list(a)})
        assert len(joined.t_ms) == 10
        assert joined.gaps == ()

    def test_offset_series_shrink_by_one(self):
        a = series([0.0] * 10)
        b = series([0.0] * 10, t0=50)
        joined = join_reports({"a": a, "b": b})
        assert len(joined.t_ms) == 9
        assert set(joined.gaps) == {0, 500}

    def test_differing_intervals_rejected(self):
        a = series([0.0] * 10)
        b = series([0.0] * 10, interval=100)
        with pytest.raises(IntervalMismatch):
            join_reports({"a": a, "b": b})


class TestMetrics:
    def test_mae_of_identical_series_is_zero(self):
        x = [1.0, 2.0, 5.0]
        assert mae(x, x) == 0.0
        assert rmse(x, x) == 0.0

    def test_mae_is_symmetric(self):
        a = [1.0, 4.0, -2.0]
        b = [0.5, 6.0, 3.0]
        assert mae(a, b) == mae(b, a)
        assert rmse(a, b) == rmse(b, a)

    def test_mae_value(self):
        assert mae([0.0, 0.0], [3.0, 5.0]) == 4.0


class TestCompare:
    def test_all_equal_is_a_tie(self):
        f = series([0.0] * 20)
        result = compare(f, list(f), list(f), window=(0, 950))
        assert result.tie
        assert not result.corrected_tracks_better
        assert result.mae_delay_raw_ms == 0.0

    def test_constructed_offset_gives_clean_verdict(self):
        f = series([0.0] * 20)
        raw = [ProbeReport(r.t_ms, r.throughput_bps, r.mean_delay_ms + 30.0,
                           r.jitter_ms, r.loss_rate, r.packets_received,
                           r.packets_expected)
               if 200 <= r.t_ms <= 700 else r for r in f]
        result = compare(f, raw, list(f), window=(200, 700))
        assert result.window_mae_delay_raw_ms == pytest.approx(30.0)
        assert result.window_mae_delay_corrected_ms == 0.0
        assert result.corrected_tracks_better
        assert not result.tie

    def test_full_span_and_window_maes_differ(self):
        f = series([0.0] * 20)
        raw = [ProbeReport(r.t_ms, r.throughput_bps, r.mean_delay_ms + 10.0,
                           r.jitter_ms, r.loss_rate, r.packets_received,
                           r.packets_expected)
               if r.t_ms < 500 else r for r in f]
        result = compare(f, raw, list(f), window=(0, 450))
        assert result.window_mae_delay_raw_ms == pytest.approx(10.0)
        assert result.mae_delay_raw_ms == pytest.approx(5.0)

    def test_deterministic_and_pure(self):
        f = series([1.0, 2.0, 3.0])
        raw = series([2.0, 1.0, 0.0])
        corrected = series([1.5, 2.0, 2.5])
        a = compare(f, raw, corrected, (0, 100))
        b = compare(f, raw, corrected, (0, 100))
        assert a == b


class TestExport:
    def test_one_interval_three_series_two_metrics(self):
        f = series([0.0])
        result = compare(f, list(f), list(f), window=(0, 0))
        text = export_plot_data(result)
        lines = text.strip().split("\n")
        assert lines[0] == "ts_ms,series,metric,value"
        assert len(lines) == 1 + 6

    def test_empty_join_exports_header_only(self):
        from linkreplay.report import ComparisonResult, JoinedReports
        empty = ComparisonResult(
            joined=JoinedReports(t_ms=(), series={"field": (), "raw": (),
                                                  "corrected": ()}, gaps=()),
            congestion_window=(0, 0), mae_delay_raw_ms=0.0,
            mae_delay_corrected_ms=0.0, mae_throughput_raw_bps=0.0,
            mae_throughput_corrected_bps=0.0, window_mae_delay_raw_ms=0.0,
            window_mae_delay_corrected_ms=0.0, rmse_delay_raw_ms=0.0,
            rmse_delay_corrected_ms=0.0, corrected_tracks_better=False, tie=True)
        assert export_plot_data(empty) == "ts_ms,series,metric,value\n"

    def test_exported_values_round_trip_at_printed_precision(self):
        f = series([0.125, 1.0625])
        result = compare(f, list(f), list(f), window=(0, 50))
        text = export_plot_data(result)
        for line in text.strip().split("\n")[1:]:
            t, name, metric, value = line.split(",")
            report = result.joined.series[name][int(t) // 50]
            if metric == "delay_ms":
                assert float(value) == pytest.approx(report.mean_delay_ms, abs=5e-4)
            else:
                assert float(value) * 1000.0 == pytest.approx(report.throughput_bps,
                                                              abs=0.5)

    def test_comparison_json_is_stable(self):
        f = series([0.0] * 4)
        result = compare(f, list(f), list(f), window=(0, 150))
        payload = result.to_json()
        assert '"corrected_tracks_better": false' in payload
        assert '"tie": true' in payload
