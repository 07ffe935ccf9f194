// Canvas line charts with an optional setpoint reference line. The coordinate
// math is exposed as pure functions so tests can check it without a DOM.

import type { SensorRecord } from "./types";

export interface ChartPoint {
  t: number; // epoch ms
  v: number;
}

export interface ChartLayout {
  points: Array<[number, number]>; // pixel coords, same order as input
  tMin: number;
  tMax: number;
  vMin: number;
  vMax: number;
  x: (t: number) => number;
  y: (v: number) => number;
}

export const PADDING = { left: 44, right: 12, top: 10, bottom: 22 };

export function computeLayout(
  points: ChartPoint[],
  width: number,
  height: number,
  includeValue?: number,
): ChartLayout {
  const innerW = width - PADDING.left - PADDING.right;
  const innerH = height - PADDING.top - PADDING.bottom;
  const ts = points.map((p) => p.t);
  const vs = points.map((p) => p.v);
  if (includeValue !== undefined) vs.push(includeValue);
  const tMin = ts.length ? Math.min(...ts) : 0;
  const tMax = ts.length ? Math.max(...ts) : 1;
  let vMin = vs.length ? Math.min(...vs) : 0;
  let vMax = vs.length ? Math.max(...vs) : 1;
  if (vMax - vMin < 1e-9) {
    vMin -= 0.5;
    vMax += 0.5;
  }
  const pad = (vMax - vMin) * 0.08;
  vMin -= pad;
  vMax += pad;
  const tSpan = Math.max(tMax - tMin, 1);
  const x = (t: number) => PADDING.left + ((t - tMin) / tSpan) * innerW;
  const y = (v: number) => PADDING.top + (1 - (v - vMin) / (vMax - vMin)) * innerH;
  return { points: points.map((p) => [x(p.t), y(p.v)]), tMin, tMax, vMin, vMax, x, y };
}

export function sensorSeries(
  records: SensorRecord[],
  field: "temperature" | "humidity",
): ChartPoint[] {
  return records.map((r) => ({ t: Date.parse(r.timestamp), v: r[field] }));
}

export class LineChart {
  private ctx: CanvasRenderingContext2D;

  constructor(
    private canvas: HTMLCanvasElement,
    private color: string,
    private unit: string,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  render(points: ChartPoint[], reference?: number): void {
    const { width, height } = this.canvas;
    const ctx = this.ctx;
    ctx.clearRect(0, 0, width, height);
    if (points.length === 0) {
      ctx.fillStyle = "#8a8f98";
      ctx.font = "13px sans-serif";
      ctx.fillText("no data in range", width / 2 - 45, height / 2);
      return;
    }
    const layout = computeLayout(points, width, height, reference);

    ctx.strokeStyle = "#2c313a";
    ctx.lineWidth = 1;
    ctx.strokeRect(PADDING.left, PADDING.top, width - PADDING.left - PADDING.right,
      height - PADDING.top - PADDING.bottom);

    ctx.fillStyle = "#8a8f98";
    ctx.font = "11px sans-serif";
    for (const frac of [0, 0.5, 1]) {
      const v = layout.vMin + frac * (layout.vMax - layout.vMin);
      ctx.fillText(`${v.toFixed(1)}${this.unit}`, 2, layout.y(v) + 4);
    }

    if (reference !== undefined) {
      ctx.strokeStyle = "#c7a44a";
      ctx.setLineDash([5, 4]);
      ctx.beginPath();
      ctx.moveTo(PADDING.left, layout.y(reference));
      ctx.lineTo(width - PADDING.right, layout.y(reference));
      ctx.stroke();
      ctx.setLineDash([]);
      ctx.fillStyle = "#c7a44a";
      ctx.fillText(`target ${reference.toFixed(1)}${this.unit}`, width - 120, layout.y(reference) - 4);
    }

    ctx.strokeStyle = this.color;
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    layout.points.forEach(([px, py], i) => {
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
}
