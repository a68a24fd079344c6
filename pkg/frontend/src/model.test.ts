import { describe, expect, it } from "vitest";

import { ViewModel } from "./model.ts";
import type { ApiEvent, StatusSnapshot } from "./types.ts";

const snapshot = (overrides: Partial<StatusSnapshot> = {}): StatusSnapshot => ({
  status: "idle",
  t_ms: 0,
  speed: 1,
  lat_deg: 35.0,
  lon_deg: 139.0,
  paths: { lte0: { rate_bps: 5e6, base_delay_ms: 30, jitter_ms: 2, loss_rate: 0 } },
  active_variant: "raw",
  ...overrides,
});

const positionEvent = (t: number, lat: number, lon: number): ApiEvent => ({
  t_ms: t,
  kind: "position",
  path_id: null,
  payload: { lat_deg: lat, lon_deg: lon },
});

describe("ViewModel", () => {
  it("mirrors the status snapshot", () => {
    const vm = new ViewModel();
    vm.applyStatus(snapshot({ status: "running", t_ms: 500, speed: 2 }));
    expect(vm.status).toBe("running");
    expect(vm.t_ms).toBe(500);
    expect(vm.speed).toBe(2);
    expect([...vm.paths.keys()]).toEqual(["lte0"]);
  });

  it("marker always equals the latest position event", () => {
    const vm = new ViewModel();
    vm.applyEvent(positionEvent(0, 35.0, 139.0));
    vm.applyEvent(positionEvent(50, 35.001, 139.001));
    vm.applyEvent(positionEvent(100, 35.002, 139.002));
    expect(vm.marker).toEqual({ lat_deg: 35.002, lon_deg: 139.002 });
    expect(vm.t_ms).toBe(100);
  });

  it("link_params events feed the target series monotonically", () => {
    const vm = new ViewModel();
    for (let t = 0; t <= 500; t += 50) {
      vm.applyEvent({
        t_ms: t,
        kind: "link_params",
        path_id: "lte0",
        payload: { rate_bps: 5e6, base_delay_ms: 30 + t / 100, jitter_ms: 2, loss_rate: 0 },
      });
    }
    const series = vm.pathSeries("lte0");
    expect(series.targetThroughput.length).toBe(11);
    const times = series.targetDelay.points.map((p) => p.t_ms);
    expect(times).toEqual([...times].sort((a, b) => a - b));
  });

  it("probe_report events feed the measured series", () => {
    const vm = new ViewModel();
    vm.applyEvent({
      t_ms: 0,
      kind: "probe_report",
      path_id: "lte0",
      payload: { throughput_bps: 1e6, mean_delay_ms: 32, jitter_ms: 0.1, loss_rate: 0 },
    });
    expect(vm.pathSeries("lte0").measuredThroughput.points[0].value).toBe(1e6);
    expect(vm.pathSeries("lte0").measuredDelay.points[0].value).toBe(32);
  });

  it("state_change events update the status", () => {
    const vm = new ViewModel();
    vm.applyEvent({ t_ms: 0, kind: "state_change", path_id: null,
                    payload: { status: "finished" } });
    expect(vm.status).toBe("finished");
  });

  it("notifies listeners on every mutation", () => {
    const vm = new ViewModel();
    let calls = 0;
    vm.onChange(() => calls++);
    vm.applyStatus(snapshot());
    vm.applyEvent(positionEvent(0, 35, 139));
    vm.setConnected(true);
    vm.setIntervals([]);
    expect(calls).toBe(4);
  });

  it("resetSeries clears metric history but keeps the route", () => {
    const vm = new ViewModel();
    vm.setRoute([{ t_ms: 0, lat_deg: 35, lon_deg: 139 }]);
    vm.applyEvent({ t_ms: 0, kind: "link_params", path_id: "lte0",
                    payload: { rate_bps: 1, base_delay_ms: 1, jitter_ms: 0, loss_rate: 0 } });
    vm.resetSeries();
    expect(vm.pathSeries("lte0").targetThroughput.length).toBe(0);
    expect(vm.route.length).toBe(1);
  });
});
