export type SessionStatus = "idle" | "running" | "paused" | "finished";

export interface PathParams {
  rate_bps: number;
  base_delay_ms: number;
  jitter_ms: number;
  loss_rate: number;
}

export interface StatusSnapshot {
  status: SessionStatus;
  t_ms: number;
  speed: number;
  lat_deg: number | null;
  lon_deg: number | null;
  paths: Record<string, PathParams>;
  active_variant: "raw" | "corrected";
}

export interface ApiEvent {
  t_ms: number;
  kind: "position" | "link_params" | "probe_report" | "state_change";
  path_id: string | null;
  payload: Record<string, number | string | boolean>;
}

export interface CorrectionInterval {
  start_ms: number;
  end_ms: number;
  replacement_delay_ms: number;
  replacement_jitter_ms: number;
  window_sample_count: number;
}

export interface CorrectionRequest {
  path_id?: string;
  b_th_bps: number;
  d_th_ms: number;
  t_th_ms: number;
  t_adj_ms: number;
}

export interface RoutePoint {
  t_ms: number;
  lat_deg: number;
  lon_deg: number;
}
