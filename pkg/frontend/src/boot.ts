import { ApiClient } from "./api.ts";
import { drawChart } from "./charts.ts";
import { bindControls } from "./controls.ts";
import { parseScenarioRoute } from "./csv.ts";
import { drawRoute } from "./map.ts";
import { ViewModel } from "./model.ts";

const PALETTE = ["#58a6ff", "#3fb950", "#d29922", "#bc8cff", "#f778ba"];

export interface BootHandle {
  stop(): void;
}

/** Wire controls, charts, map, status polling and the event stream. */
export function boot(
  doc: Document,
  client: ApiClient,
  vm: ViewModel,
  options: { pollMs?: number } = {},
): BootHandle {
  bindControls(doc, client, vm);

  const throughputCanvas = doc.getElementById("chart-throughput") as HTMLCanvasElement;
  const delayCanvas = doc.getElementById("chart-delay") as HTMLCanvasElement;
  const mapCanvas = doc.getElementById("route-map") as HTMLCanvasElement;

  let dirty = true;
  let stopped = false;
  vm.onChange(() => {
    dirty = true;
  });

  const redraw = () => {
    if (stopped) return;
    if (dirty) {
      dirty = false;
      const paths = [...vm.paths.entries()];
      drawChart(
        throughputCanvas,
        paths.flatMap(([pathId, series], i) => [
          { label: `${pathId} target`, series: series.targetThroughput,
            color: PALETTE[i % PALETTE.length], dashed: true },
          { label: `${pathId} probe`, series: series.measuredThroughput,
            color: PALETTE[i % PALETTE.length] },
        ]),
        { unit: "kbps", scale: 1000 },
      );
      drawChart(
        delayCanvas,
        paths.flatMap(([pathId, series], i) => [
          { label: `${pathId} target`, series: series.targetDelay,
            color: PALETTE[i % PALETTE.length], dashed: true },
          { label: `${pathId} probe`, series: series.measuredDelay,
            color: PALETTE[i % PALETTE.length] },
        ]),
        { unit: "ms", overlays: vm.intervals },
      );
      drawRoute(mapCanvas, vm.route, vm.marker);
    }
    requestAnimationFrame(redraw);
  };
  requestAnimationFrame(redraw);

  const loadRoute = () =>
    client
      .scenarioCsv()
      .then((text) => vm.setRoute(parseScenarioRoute(text)))
      .catch((error) => console.error("scenario load failed:", error));

  const pollStatus = () => {
    client
      .status()
      .then((snapshot) => {
        if (!vm.connected) {
          vm.setConnected(true);
          if (vm.route.length === 0) void loadRoute();
        }
        vm.applyStatus(snapshot);
      })
      .catch((error) => vm.setConnected(false, String(error)));
  };
  pollStatus();
  const poll = setInterval(pollStatus, options.pollMs ?? 1000);

  const controller = new AbortController();
  void client.streamEvents(
    {
      onEvent: (event) => vm.applyEvent(event),
      onConnect: () => vm.setConnected(true),
      onDisconnect: (error) => {
        if (error) vm.setConnected(false, String(error));
      },
    },
    { signal: controller.signal },
  );

  return {
    stop() {
      stopped = true;
      clearInterval(poll);
      controller.abort();
    },
  };
}
