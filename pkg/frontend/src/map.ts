import type { RoutePoint } from "./types.ts";

export interface Projection {
  toCanvas(lat_deg: number, lon_deg: number): { x: number; y: number };
}

/**
 * Equirectangular local projection fitted to the route's bounding box.
 * Longitude is compressed by cos(mid-latitude) so distances keep their
 * aspect ratio; no map-tile service is involved.
 */
export function fitProjection(
  route: RoutePoint[],
  width: number,
  height: number,
  margin = 16,
): Projection {
  const lats = route.map((p) => p.lat_deg);
  const lons = route.map((p) => p.lon_deg);
  const latMin = Math.min(...lats);
  const latMax = Math.max(...lats);
  const lonMin = Math.min(...lons);
  const lonMax = Math.max(...lons);
  const midLat = (latMin + latMax) / 2;
  const kx = Math.cos((midLat * Math.PI) / 180);

  const spanX = Math.max((lonMax - lonMin) * kx, 1e-9);
  const spanY = Math.max(latMax - latMin, 1e-9);
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  const offsetX = (width - spanX * scale) / 2;
  const offsetY = (height - spanY * scale) / 2;

  return {
    toCanvas(lat_deg: number, lon_deg: number) {
      const x = offsetX + (lon_deg - lonMin) * kx * scale;
      const y = height - offsetY - (lat_deg - latMin) * scale; // north up
      return { x, y };
    },
  };
}

export function drawRoute(
  canvas: HTMLCanvasElement,
  route: RoutePoint[],
  marker: { lat_deg: number; lon_deg: number } | null,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (route.length === 0) return;
  const projection = fitProjection(route, canvas.width, canvas.height);

  ctx.strokeStyle = "#4a6f8a";
  ctx.lineWidth = 2;
  ctx.beginPath();
  route.forEach((p, i) => {
    const { x, y } = projection.toCanvas(p.lat_deg, p.lon_deg);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();

  if (marker) {
    const { x, y } = projection.toCanvas(marker.lat_deg, marker.lon_deg);
    ctx.fillStyle = "#e4572e";
    ctx.beginPath();
    ctx.arc(x, y, 6, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 1.5;
    ctx.stroke();
  }
}
