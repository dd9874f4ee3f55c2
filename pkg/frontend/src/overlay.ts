/**
 * Mask overlay rendering.  The decoded mask keeps the image's own pixel
 * grid; scaling to display size happens only at draw time, with smoothing
 * off, so the overlay stays pixel-identical to what the service returned.
 */

import type { PromptPoint } from "./coords.js";

export const OVERLAY_COLOR: [number, number, number] = [66, 133, 244];

/** Expand a flat 0/1 mask into RGBA bytes (transparent where unset). */
export function maskToRgba(
  mask: ArrayLike<number>,
  width: number,
  height: number,
  color: [number, number, number] = OVERLAY_COLOR,
  opacity = 0.5,
): Uint8ClampedArray<ArrayBuffer> {
  if (mask.length !== width * height) {
    throw new Error(`mask has ${mask.length} pixels, expected ${width * height}`);
  }
  const alpha = Math.round(Math.min(Math.max(opacity, 0), 1) * 255);
  const rgba = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  for (let i = 0; i < mask.length; i++) {
    if (mask[i]) {
      rgba[i * 4] = color[0];
      rgba[i * 4 + 1] = color[1];
      rgba[i * 4 + 2] = color[2];
      rgba[i * 4 + 3] = alpha;
    }
  }
  return rgba;
}

/** Draw the mask onto a display-scaled context via an offscreen canvas. */
export function drawMaskOverlay(
  ctx: CanvasRenderingContext2D,
  mask: Uint8Array,
  width: number,
  height: number,
  scale: number,
  opacity: number,
): void {
  const off = document.createElement("canvas");
  off.width = width;
  off.height = height;
  const offCtx = off.getContext("2d");
  if (!offCtx) throw new Error("2d canvas context unavailable");
  offCtx.putImageData(new ImageData(maskToRgba(mask, width, height, OVERLAY_COLOR, opacity), width, height), 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, width * scale, height * scale);
}

/** Draw click markers at display coordinates (image coords times scale). */
export function drawMarkers(
  ctx: CanvasRenderingContext2D,
  clicks: PromptPoint[],
  scale: number,
): void {
  for (const p of clicks) {
    const cx = (p.x + 0.5) * scale;
    const cy = (p.y + 0.5) * scale;
    ctx.beginPath();
    ctx.arc(cx, cy, Math.max(3, scale * 0.4), 0, Math.PI * 2);
    ctx.fillStyle = "rgba(34, 197, 94, 0.9)";
    ctx.fill();
    ctx.lineWidth = 1.5;
    ctx.strokeStyle = "white";
    ctx.stroke();
  }
}
