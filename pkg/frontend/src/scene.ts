// Schematic shelf rendering: the scene descriptor's bounding boxes drawn on a
// canvas with the detector's class + confidence labels. An honest stand-in
// for camera frames, clearly labeled as simulated.

import type { ImageRecord } from "./types";

const CLASS_COLORS = [
  "#7c5cff",
  "#37b26c",
  "#e05c5c",
  "#3b9dd2",
  "#c7a44a",
  "#b05cb0",
];

export function colorForClass(className: string): string {
  let hash = 0;
  for (const ch of className) hash = (hash * 31 + ch.charCodeAt(0)) >>> 0;
  return CLASS_COLORS[hash % CLASS_COLORS.length];
}

export interface SceneBox {
  x: number;
  y: number;
  w: number;
  h: number;
  label: string;
  color: string;
}

/** Pixel-space boxes: ground-truth geometry, predicted class + confidence labels. */
export function sceneBoxes(image: ImageRecord, width: number, height: number): SceneBox[] {
  return image.scene.map((item, i) => {
    const detected = image.items[i];
    const label = detected
      ? `${detected.className} ${(detected.confidence * 100).toFixed(0)}%`
      : item.className;
    const [x, y, w, h] = item.bbox;
    return {
      x: x * width,
      y: y * height,
      w: w * width,
      h: h * height,
      label,
      color: colorForClass(detected ? detected.className : item.className),
    };
  });
}

export function drawScene(canvas: HTMLCanvasElement, image: ImageRecord | null): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#11151c";
  ctx.fillRect(0, 0, width, height);

  // shelf lines for the schematic look
  ctx.strokeStyle = "#2c313a";
  for (const frac of [0.33, 0.66]) {
    ctx.beginPath();
    ctx.moveTo(0, height * frac);
    ctx.lineTo(width, height * frac);
    ctx.stroke();
  }

  if (image) {
    ctx.font = "11px sans-serif";
    for (const box of sceneBoxes(image, width, height)) {
      ctx.strokeStyle = box.color;
      ctx.lineWidth = 1.5;
      ctx.strokeRect(box.x, box.y, box.w, box.h);
      const labelY = box.y > 14 ? box.y - 3 : box.y + box.h + 12;
      ctx.fillStyle = box.color;
      ctx.fillText(box.label, box.x, labelY);
    }
  }

  ctx.fillStyle = "#8a8f98";
  ctx.font = "10px sans-serif";
  ctx.fillText("simulated view", width - 78, height - 6);
}
