/** Canvas-space to image-space coordinate mapping. */

export interface PromptPoint {
  x: number;
  y: number;
}

export interface ImageSize {
  width: number;
  height: number;
}

/**
 * Map a click position in canvas pixels to integer image coordinates:
 * divide by the display scale, floor to a pixel index, clamp to bounds.
 * Clicks are stored in image coordinates only; the caller guarantees the
 * position lies inside the displayed image area.
 */
export function canvasClickToImageCoords(
  pos: { x: number; y: number },
  scale: number,
  image: ImageSize,
): PromptPoint {
  if (!(scale > 0) || !Number.isFinite(scale)) {
    throw new Error(`display scale must be positive, got ${scale}`);
  }
  const clamp = (v: number, hi: number) => Math.min(Math.max(v, 0), hi);
  return {
    x: clamp(Math.floor(pos.x / scale), image.width - 1),
    y: clamp(Math.floor(pos.y / scale), image.height - 1),
  };
}
