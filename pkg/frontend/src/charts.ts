import type { RollingSeries } from "./series.ts";
import type { CorrectionInterval } from "./types.ts";

export interface ChartLine {
  label: string;
  series: RollingSeries;
  color: string;
  dashed?: boolean;
}

export interface ChartOptions {
  unit: string;
  scale?: number; // value divisor for display (e.g. 1000 for bps -> kbps)
  overlays?: CorrectionInterval[];
}

/** Minimal canvas line chart over the rolling window, newest at the right. */
export function drawChart(
  canvas: HTMLCanvasElement,
  lines: ChartLine[],
  options: ChartOptions,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  const scale = options.scale ?? 1;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10151c";
  ctx.fillRect(0, 0, width, height);

  const active = lines.filter((l) => l.series.length > 0);
  if (active.length === 0) {
    ctx.fillStyle = "#8aa0b4";
    ctx.font = "12px sans-serif";
    ctx.fillText("waiting for events…", 10, height / 2);
    return;
  }

  let tMax = -Infinity;
  let vMin = Infinity;
  let vMax = -Infinity;
  for (const line of active) {
    const range = line.series.range();
    vMin = Math.min(vMin, range.min);
    vMax = Math.max(vMax, range.max);
    tMax = Math.max(tMax, line.series.points[line.series.length - 1].t_ms);
  }
  if (vMax === vMin) {
    vMax = vMin + 1;
    vMin = Math.max(0, vMin - 1);
  }
  const windowMs = active[0].series.windowMs;
  const tMin = tMax - windowMs;
  const toX = (t: number) => ((t - tMin) / windowMs) * (width - 50) + 44;
  const toY = (v: number) => height - 18 - ((v - vMin) / (vMax - vMin)) * (height - 30);

  for (const interval of options.overlays ?? []) {
    const x0 = Math.max(toX(interval.start_ms), 44);
    const x1 = Math.min(toX(interval.end_ms), width - 6);
    if (x1 <= 44 || x0 >= width - 6) continue;
    ctx.fillStyle = "rgba(228, 87, 46, 0.18)";
    ctx.fillRect(x0, 10, Math.max(x1 - x0, 2), height - 28);
  }

  ctx.strokeStyle = "#2b3947";
  ctx.lineWidth = 1;
  ctx.strokeRect(44, 10, width - 50, height - 28);

  ctx.fillStyle = "#8aa0b4";
  ctx.font = "10px sans-serif";
  ctx.fillText(`${(vMax / scale).toFixed(1)} ${options.unit}`, 2, 16);
  ctx.fillText(`${(vMin / scale).toFixed(1)}`, 2, height - 18);

  for (const line of active) {
    ctx.strokeStyle = line.color;
    ctx.lineWidth = 1.5;
    ctx.setLineDash(line.dashed ? [4, 3] : []);
    ctx.beginPath();
    let started = false;
    for (const p of line.series.points) {
      const x = toX(p.t_ms);
      if (x < 44) continue;
      const y = toY(p.value);
      if (!started) {
        ctx.moveTo(x, y);
        started = true;
      } else {
        ctx.lineTo(x, y);
      }
    }
    ctx.stroke();
  }
  ctx.setLineDash([]);
}
