import type { RoutePoint } from "./types.ts";

/** Parse the scenario CSV far enough to draw the route polyline. */
export function parseScenarioRoute(text: string): RoutePoint[] {
  const lines = text.split("\n");
  const points: RoutePoint[] = [];
  let header: string[] | null = null;
  for (const rawLine of lines) {
    const line = rawLine.trim();
    if (!line || line.startsWith("#")) continue;
    if (header === null) {
      header = line.split(",");
      continue;
    }
    const parts = line.split(",");
    if (parts.length !== header.length) {
      throw new Error(`scenario row has ${parts.length} fields, expected ${header.length}`);
    }
    const t_ms = Number(parts[header.indexOf("ts_ms")]);
    const lat_deg = Number(parts[header.indexOf("lat")]);
    const lon_deg = Number(parts[header.indexOf("lon")]);
    if (!Number.isFinite(t_ms) || !Number.isFinite(lat_deg) || !Number.isFinite(lon_deg)) {
      throw new Error(`unparseable scenario row: ${line}`);
    }
    points.push({ t_ms, lat_deg, lon_deg });
  }
  if (header === null) throw new Error("scenario CSV is empty");
  return points;
}
