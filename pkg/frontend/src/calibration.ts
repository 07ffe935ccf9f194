// Read-only calibration report page: reliability curves per model plus the
// over-/under-confidence comparison bars.

import type { CalibrationReportJson, ExperimentSummary } from "./types";

export interface ReliabilityPoint {
  confidence: number;
  accuracy: number;
  weight: number;
}

/** Non-empty bins as (mean confidence, accuracy) points for a reliability curve. */
export function reliabilityPoints(report: CalibrationReportJson): ReliabilityPoint[] {
  return report.bins
    .filter((b) => b.count > 0 && b.avgConfidence !== null && b.accuracy !== null)
    .map((b) => ({
      confidence: b.avgConfidence as number,
      accuracy: b.accuracy as number,
      weight: b.count / report.nSamples,
    }));
}

const MODEL_COLORS: Record<string, string> = {
  bce: "#37b26c",
  focal: "#e05c5c",
  adafocal: "#7c5cff",
};

export function drawReliability(canvas: HTMLCanvasElement, summary: ExperimentSummary): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  const pad = 30;
  const plot = (cx: number, cy: number) => [
    pad + cx * (width - 2 * pad),
    height - pad - cy * (height - 2 * pad),
  ];
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#2c313a";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);

  // perfect-calibration diagonal
  ctx.strokeStyle = "#555b66";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(...(plot(0, 0) as [number, number]));
  ctx.lineTo(...(plot(1, 1) as [number, number]));
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.font = "11px sans-serif";
  let legendY = pad + 12;
  for (const [name, metrics] of Object.entries(summary.models)) {
    const color = MODEL_COLORS[name] ?? "#8a8f98";
    const points = reliabilityPoints(metrics.report);
    ctx.strokeStyle = color;
    ctx.fillStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    points.forEach((p, i) => {
      const [px, py] = plot(p.confidence, p.accuracy);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    for (const p of points) {
      const [px, py] = plot(p.confidence, p.accuracy);
      ctx.beginPath();
      ctx.arc(px, py, 2.5, 0, 2 * Math.PI);
      ctx.fill();
    }
    ctx.fillText(`${name} (ECE ${metrics.ece.toFixed(3)})`, pad + 8, legendY);
    legendY += 14;
  }
  ctx.fillStyle = "#8a8f98";
  ctx.fillText("confidence", width / 2 - 28, height - 8);
  ctx.save();
  ctx.translate(10, height / 2 + 24);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText("accuracy", 0, 0);
  ctx.restore();
}

export function drawConfidenceComparison(
  canvas: HTMLCanvasElement,
  summary: ExperimentSummary,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const models = Object.entries(summary.models);
  const maxVal = Math.max(
    0.01,
    ...models.flatMap(([, m]) => [m.oce, m.uce]),
  );
  const groupW = (width - 40) / models.length;
  const barW = Math.min(38, groupW / 3);
  const base = height - 30;
  const scaleH = height - 60;
  ctx.font = "11px sans-serif";
  models.forEach(([name, metrics], i) => {
    const cx = 20 + i * groupW + groupW / 2;
    // overconfidence: confidence above accuracy; underconfidence: below
    ctx.fillStyle = "#e05c5c";
    const overH = (metrics.oce / maxVal) * scaleH;
    ctx.fillRect(cx - barW - 3, base - overH, barW, overH);
    ctx.fillStyle = "#3b9dd2";
    const underH = (metrics.uce / maxVal) * scaleH;
    ctx.fillRect(cx + 3, base - underH, barW, underH);
    ctx.fillStyle = "#c9ccd1";
    ctx.fillText(name, cx - barW + 2, base + 14);
  });
  ctx.fillStyle = "#e05c5c";
  ctx.fillRect(20, 8, 10, 10);
  ctx.fillStyle = "#c9ccd1";
  ctx.fillText("overconfidence (OCE)", 34, 17);
  ctx.fillStyle = "#3b9dd2";
  ctx.fillRect(180, 8, 10, 10);
  ctx.fillStyle = "#c9ccd1";
  ctx.fillText("underconfidence (UCE)", 194, 17);
}
