import { RollingSeries } from "./series.ts";
import type {
  ApiEvent,
  CorrectionInterval,
  RoutePoint,
  SessionStatus,
  StatusSnapshot,
} from "./types.ts";

export interface PathSeries {
  targetThroughput: RollingSeries; // scenario rate from link_params events
  targetDelay: RollingSeries;
  measuredThroughput: RollingSeries; // probe_report events
  measuredDelay: RollingSeries;
}

/**
 * Central client state: a mirror of the session status plus rolling metric
 * series fed by the event stream.  The dashboard is a pure observer — every
 * number held here was received from the API, and the only local arithmetic
 * is windowed min/max/mean for axis scaling (inside RollingSeries).
 */
export class ViewModel {
  status: SessionStatus = "idle";
  t_ms = 0;
  speed = 1;
  activeVariant: "raw" | "corrected" = "raw";
  connected = false;
  lastError: string | null = null;

  paths = new Map<string, PathSeries>();
  route: RoutePoint[] = [];
  marker: { lat_deg: number; lon_deg: number } | null = null;
  intervals: CorrectionInterval[] = [];

  private listeners = new Set<() => void>();

  constructor(public windowMs: number = 120_000) {}

  onChange(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  pathSeries(pathId: string): PathSeries {
    let series = this.paths.get(pathId);
    if (!series) {
      series = {
        targetThroughput: new RollingSeries(this.windowMs),
        targetDelay: new RollingSeries(this.windowMs),
        measuredThroughput: new RollingSeries(this.windowMs),
        measuredDelay: new RollingSeries(this.windowMs),
      };
      this.paths.set(pathId, series);
    }
    return series;
  }

  applyStatus(snapshot: StatusSnapshot): void {
    this.status = snapshot.status;
    this.t_ms = snapshot.t_ms;
    this.speed = snapshot.speed;
    this.activeVariant = snapshot.active_variant;
    for (const pathId of Object.keys(snapshot.paths)) this.pathSeries(pathId);
    if (this.marker === null && snapshot.lat_deg !== null && snapshot.lon_deg !== null) {
      this.marker = { lat_deg: snapshot.lat_deg, lon_deg: snapshot.lon_deg };
    }
    this.notify();
  }

  applyEvent(event: ApiEvent): void {
    switch (event.kind) {
      case "position": {
        this.marker = {
          lat_deg: event.payload.lat_deg as number,
          lon_deg: event.payload.lon_deg as number,
        };
        this.t_ms = event.t_ms;
        break;
      }
      case "link_params": {
        const series = this.pathSeries(event.path_id ?? "default");
        series.targetThroughput.push(event.t_ms, event.payload.rate_bps as number);
        series.targetDelay.push(event.t_ms, event.payload.base_delay_ms as number);
        this.t_ms = event.t_ms;
        break;
      }
      case "probe_report": {
        const series = this.pathSeries(event.path_id ?? "default");
        series.measuredThroughput.push(event.t_ms, event.payload.throughput_bps as number);
        series.measuredDelay.push(event.t_ms, event.payload.mean_delay_ms as number);
        break;
      }
      case "state_change": {
        this.status = event.payload.status as SessionStatus;
        break;
      }
    }
    this.notify();
  }

  setConnected(connected: boolean, error: string | null = null): void {
    this.connected = connected;
    this.lastError = error;
    this.notify();
  }

  setRoute(route: RoutePoint[]): void {
    this.route = route;
    this.notify();
  }

  setIntervals(intervals: CorrectionInterval[]): void {
    this.intervals = intervals;
    this.notify();
  }

  resetSeries(): void {
    for (const series of this.paths.values()) {
      series.targetThroughput.clear();
      series.targetDelay.clear();
      series.measuredThroughput.clear();
      series.measuredDelay.clear();
    }
    this.notify();
  }
}
