import json
import threading
import time

import httpx
import pytest
from fastapi.testclient import TestClient

from linkreplay.api import create_app
from linkreplay.emulator import LinkConfig
from linkreplay.orchestrator import PathSpec, ReplaySession, TopologyConfig
from linkreplay.probe import ProbeConfig, ProbeReport, write_reports_csv
from linkreplay.report import compare

from conftest import live_server, make_scenario


def make_session(scenario=None, paced=False, workload=None):
    scenario = scenario or make_scenario(40)
    cfg = TopologyConfig(paths=(PathSpec(
        path_id=scenario.path_id, scenario=scenario,
        link_config=LinkConfig(rng_seed=1)),))
    return ReplaySession(cfg, workload=workload, paced=paced)


class TestStatusAndControl:
    def test_idle_status(self):
        client = TestClient(create_app(make_session()))
        body = client.get("/status").json()
        assert body["status"] == "idle"
        assert body["t_ms"] == 0
        assert body["paths"]["path0"]["rate_bps"] == 5_000_000.0

    def test_pause_while_running(self):
        session = make_session(make_scenario(400), paced=True)
        client = TestClient(create_app(session))
        assert client.post("/control", json={"cmd": "start"}).status_code == 200
        resp = client.post("/control", json={"cmd": "pause"})
        assert resp.status_code == 200
        assert resp.json()["status"] == "paused"
        session.shutdown()

    def test_seek_while_running_is_409(self):
        session = make_session(make_scenario(400), paced=True)
        client = TestClient(create_app(session))
        client.post("/control", json={"cmd": "start"})
        resp = client.post("/control", json={"cmd": "seek", "t_ms": 5000})
        assert resp.status_code == 409
        assert "paused" in resp.json()["detail"]
        session.shutdown()

    def test_unknown_command_is_409(self):
        client = TestClient(create_app(make_session()))
        assert client.post("/control", json={"cmd": "warp"}).status_code == 409

    def test_set_speed(self):
        session = make_session(make_scenario(400), paced=True)
        client = TestClient(create_app(session))
        resp = client.post("/control", json={"cmd": "set_speed", "speed": 8.0})
        assert resp.json()["speed"] == 8.0
        session.shutdown()


class TestScenarioEndpoint:
    def test_scenario_csv_round_trips(self):
        from linkreplay.ingest import read_scenario_csv

        scenario = make_scenario(12, path_id="lte0")
        client = TestClient(create_app(make_session(scenario)))
        resp = client.get("/scenario", params={"path_id": "lte0"})
        assert resp.status_code == 200
        parsed = read_scenario_csv(resp.text, path_id="lte0")
        assert parsed == scenario

    def test_unknown_path_is_404(self):
        client = TestClient(create_app(make_session()))
        assert client.get("/scenario", params={"path_id": "nope"}).status_code == 404


class TestPipelineCorrect:
    def test_correction_returns_intervals_and_enables_variant(self, dip_scenario):
        session = make_session(dip_scenario)
        client = TestClient(create_app(session))
        resp = client.post("/pipeline/correct", json={})  # defaults
        assert resp.status_code == 200
        body = resp.json()
        assert body["path_id"] == "path0"
        assert len(body["intervals"]) == 1
        iv = body["intervals"][0]
        assert (iv["start_ms"], iv["end_ms"]) == (10_000, 11_950)
        assert iv["replacement_delay_ms"] == pytest.approx(30.0)

        # the corrected variant is now selectable for the next start
        resp = client.post("/control", json={"cmd": "start", "variant": "corrected"})
        assert resp.status_code == 200
        session.wait_finished(30.0)
        resp = client.get("/scenario")
        assert ",1\n" in resp.text  # corrected rows present

    def test_corrected_variant_without_correction_is_409(self):
        client = TestClient(create_app(make_session()))
        resp = client.post("/control", json={"cmd": "start", "variant": "corrected"})
        assert resp.status_code == 409

    def test_custom_thresholds_respected(self, dip_scenario):
        client = TestClient(create_app(make_session(dip_scenario)))
        # thresholds below the dip's values: nothing qualifies
        resp = client.post("/pipeline/correct",
                           json={"b_th_bps": 100_000.0, "d_th_ms": 200.0})
        assert resp.json()["intervals"] == []


def read_stream(base_url, out, params=None, timeout=30.0):
    with httpx.Client(timeout=timeout) as client:
        with client.stream("GET", f"{base_url}/events", params=params or {}) as resp:
            for line in resp.iter_lines():
                if line:
                    out.append(line)


class TestEvents:
    def test_stream_delivers_events_then_ends(self):
        session = make_session(make_scenario(20), paced=False)
        with live_server(create_app(session)) as base:
            lines: list[str] = []
            reader = threading.Thread(
                target=read_stream, args=(base, lines),
                kwargs={"params": {"kinds": "position"}}, daemon=True)
            reader.start()
            time.sleep(0.3)  # let the subscription attach
            session.control("start")
            reader.join(timeout=30.0)
            assert not reader.is_alive()
        events = [json.loads(line) for line in lines]
        assert events
        assert all(e["kind"] == "position" for e in events)
        t_values = [e["t_ms"] for e in events]
        assert t_values == sorted(t_values)

    def test_subscribe_after_finish(self):
        session = make_session(make_scenario(10), paced=False)
        client = TestClient(create_app(session))
        session.control("start")
        assert session.wait_finished(10.0)
        with client.stream("GET", "/events") as resp:
            events = [json.loads(line) for line in resp.iter_lines() if line]
        assert len(events) == 1
        assert events[0]["kind"] == "state_change"
        assert events[0]["payload"]["status"] == "finished"

    def test_two_subscribers_see_identical_sequences(self):
        session = make_session(make_scenario(30), paced=False)
        with live_server(create_app(session)) as base:
            lines_a: list[str] = []
            lines_b: list[str] = []
            readers = [
                threading.Thread(target=read_stream, args=(base, lines_a), daemon=True),
                threading.Thread(target=read_stream, args=(base, lines_b), daemon=True),
            ]
            for r in readers:
                r.start()
            time.sleep(0.3)
            session.control("start")
            for r in readers:
                r.join(timeout=30.0)
                assert not r.is_alive()
        assert lines_a == lines_b
        assert lines_a


class TestObserverNeutrality:
    def run_with_subscribers(self, n_subs):
        session = make_session(make_scenario(60), paced=False,
                               workload=ProbeConfig(duration_ms=2000, seed=3))
        with live_server(create_app(session)) as base:
            sinks = [[] for _ in range(n_subs)]
            readers = [threading.Thread(target=read_stream, args=(base, sink),
                                        daemon=True) for sink in sinks]
            for r in readers:
                r.start()
            if readers:
                time.sleep(0.3)
            session.control("start")
            assert session.wait_finished(30.0)
            for r in readers:
                r.join(timeout=30.0)
        return write_reports_csv(session.result().paths["path0"].reports)

    def test_reports_identical_with_0_and_2_subscribers(self):
        assert self.run_with_subscribers(0) == self.run_with_subscribers(2)


class TestReportEndpoint:
    def test_404_without_comparison(self):
        client = TestClient(create_app(make_session()))
        assert client.get("/report").status_code == 404

    def test_configured_comparison_served(self):
        reports = [ProbeReport(t_ms=i * 50, throughput_bps=1e6, mean_delay_ms=30.0,
                               jitter_ms=1.0, loss_rate=0.0, packets_received=5,
                               packets_expected=5) for i in range(10)]
        result = compare(reports, list(reports), list(reports), window=(0, 450))
        client = TestClient(create_app(make_session(), comparison=result))
        body = client.get("/report").json()
        assert body["tie"] is True
        assert body["window_mae_delay_raw_ms"] == 0.0
