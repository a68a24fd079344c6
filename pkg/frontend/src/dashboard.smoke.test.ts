/**
 * Headless analogue of the dashboard smoke check, against a live fake API
 * over real HTTP: connect, charts updating while the replay runs, marker
 * advancing along the route polyline, pause -> resume chip round trip, and
 * the default correction form overlaying exactly one interval.  The
 * real-browser procedure is in the README.
 */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "./api.ts";
import { boot, type BootHandle } from "./boot.ts";
import { ViewModel } from "./model.ts";
import { FakeApi } from "./testing/fake_api.ts";
import { mountDashboardDom } from "./testing/mount.ts";

describe("dashboard smoke", () => {
  let api: FakeApi;
  let client: ApiClient;
  let vm: ViewModel;
  let handle: BootHandle;

  beforeEach(async () => {
    api = new FakeApi({ rows: 200, eventPeriodMs: 5 });
    client = new ApiClient(await api.listen());
    mountDashboardDom();
    vm = new ViewModel();
    handle = boot(document, client, vm, { pollMs: 50 });
  });

  afterEach(async () => {
    handle.stop();
    await api.close();
  });

  it("connects, charts update live, the marker tracks the route, controls round-trip,"
     + " and the correction form overlays one interval", async () => {
    // connect: banner clears once /status answers and the route loads
    await vi.waitFor(() => {
      expect(vm.connected).toBe(true);
      expect(vm.route.length).toBe(200);
    }, { timeout: 5000 });
    expect(document.getElementById("banner")!.classList.contains("hidden")).toBe(true);

    // start the replay through the UI
    (document.getElementById("btn-start") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(document.getElementById("status-chip")!.textContent).toBe("running");
    }, { timeout: 5000 });

    // throughput and delay chart series grow while the replay runs
    const counts = () => {
      const series = vm.pathSeries("lte0");
      return [series.targetThroughput.length, series.targetDelay.length];
    };
    await vi.waitFor(() => expect(counts()[0]).toBeGreaterThan(3), { timeout: 5000 });
    const before = counts();
    await vi.waitFor(() => {
      const after = counts();
      expect(after[0]).toBeGreaterThan(before[0]);
      expect(after[1]).toBeGreaterThan(before[1]);
    }, { timeout: 5000 });

    // the vehicle marker advances and stays on the route polyline
    await vi.waitFor(() => expect(vm.marker).not.toBeNull(), { timeout: 5000 });
    const firstMarker = { ...vm.marker! };
    await vi.waitFor(() => {
      expect(vm.marker!.lat_deg).toBeGreaterThan(firstMarker.lat_deg);
    }, { timeout: 5000 });
    const onRoute = vm.route.some(
      (p) => Math.abs(p.lat_deg - vm.marker!.lat_deg) < 1e-9
        && Math.abs(p.lon_deg - vm.marker!.lon_deg) < 1e-9,
    );
    expect(onRoute).toBe(true);

    // pause -> resume round trip with correct status chips
    (document.getElementById("btn-pause") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(document.getElementById("status-chip")!.textContent).toBe("paused");
    }, { timeout: 5000 });
    (document.getElementById("btn-resume") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(document.getElementById("status-chip")!.textContent).toBe("running");
    }, { timeout: 5000 });

    // default correction form overlays exactly one interval
    const form = document.getElementById("correction-form") as HTMLFormElement;
    form.onsubmit!(new Event("submit") as SubmitEvent);
    await vi.waitFor(() => expect(vm.intervals).toHaveLength(1), { timeout: 5000 });
    expect(vm.intervals[0].start_ms).toBe(10_000);
    expect(document.getElementById("intervals-label")!.textContent).toBe("1 interval(s)");
  }, 30_000);
});
