export interface SeriesPoint {
  t_ms: number;
  value: number;
}

/**
 * Rolling time series with a bounded window.  Timestamps must be monotone:
 * stale points (older than the newest one) are dropped so chart series can
 * never run backwards, and points older than the window fall off the front.
 */
export class RollingSeries {
  private data: SeriesPoint[] = [];

  constructor(public windowMs: number = 120_000) {}

  push(t_ms: number, value: number): boolean {
    const last = this.data[this.data.length - 1];
    if (last && t_ms < last.t_ms) return false;
    this.data.push({ t_ms, value });
    const cutoff = t_ms - this.windowMs;
    let drop = 0;
    while (drop < this.data.length && this.data[drop].t_ms < cutoff) drop++;
    if (drop > 0) this.data = this.data.slice(drop);
    return true;
  }

  get points(): readonly SeriesPoint[] {
    return this.data;
  }

  get length(): number {
    return this.data.length;
  }

  clear(): void {
    this.data = [];
  }

  /** Windowed min/max/mean, used only for axis scaling. */
  range(): { min: number; max: number; mean: number } {
    if (this.data.length === 0) return { min: 0, max: 1, mean: 0 };
    let min = Infinity;
    let max = -Infinity;
    let sum = 0;
    for (const p of this.data) {
      if (p.value < min) min = p.value;
      if (p.value > max) max = p.value;
      sum += p.value;
    }
    return { min, max, mean: sum / this.data.length };
  }
}
