import { describe, expect, it } from "vitest";

import { fitProjection } from "./map.ts";
import type { RoutePoint } from "./types.ts";

const route: RoutePoint[] = [
  { t_ms: 0, lat_deg: 35.0, lon_deg: 139.0 },
  { t_ms: 1000, lat_deg: 35.01, lon_deg: 139.02 },
];

describe("fitProjection", () => {
  it("keeps every route point inside the canvas", () => {
    const projection = fitProjection(route, 800, 400, 16);
    for (const p of route) {
      const { x, y } = projection.toCanvas(p.lat_deg, p.lon_deg);
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThanOrEqual(800);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(y).toBeLessThanOrEqual(400);
    }
  });

  it("puts north at the top", () => {
    const projection = fitProjection(route, 800, 400);
    const south = projection.toCanvas(35.0, 139.0);
    const north = projection.toCanvas(35.01, 139.0);
    expect(north.y).toBeLessThan(south.y);
  });

  it("compresses longitude by cos(latitude) for aspect fidelity", () => {
    const square: RoutePoint[] = [
      { t_ms: 0, lat_deg: 60.0, lon_deg: 10.0 },
      { t_ms: 1, lat_deg: 60.1, lon_deg: 10.1 },
    ];
    const projection = fitProjection(square, 1000, 1000, 0);
    const a = projection.toCanvas(60.0, 10.0);
    const b = projection.toCanvas(60.0, 10.1);
    const c = projection.toCanvas(60.1, 10.0);
    const dx = Math.abs(b.x - a.x);
    const dy = Math.abs(c.y - a.y);
    // at 60 degrees north a 0.1 deg longitude step is about half as wide
    expect(dx / dy).toBeCloseTo(Math.cos((60.05 * Math.PI) / 180), 2);
  });

  it("handles a single-point route without dividing by zero", () => {
    const point = [{ t_ms: 0, lat_deg: 35.0, lon_deg: 139.0 }];
    const projection = fitProjection(point, 100, 100);
    const { x, y } = projection.toCanvas(35.0, 139.0);
    expect(Number.isFinite(x)).toBe(true);
    expect(Number.isFinite(y)).toBe(true);
  });
});
