/**
 * Session state and its undo history.
 *
 * Clicks are always held in image coordinates.  The undo stack tracks the
 * click list alone: undo then redo restores the exact list, while threshold
 * and overlay opacity are live controls outside the history.
 */

import type { PromptPoint } from "./coords.js";

/** Similarity threshold the slider starts at; matches the service default. */
export const DEFAULT_THRESHOLD = 3 / 255;

/** Log-scale slider range; useful thresholds cluster near zero. */
export const THRESHOLD_MIN = 1e-3;
export const THRESHOLD_MAX = 1.0;

/** Map a slider position in [0, 1] to a threshold, log-interpolated. */
export function sliderToThreshold(v: number): number {
  const t = Math.min(Math.max(v, 0), 1);
  return THRESHOLD_MIN * Math.pow(THRESHOLD_MAX / THRESHOLD_MIN, t);
}

/** Inverse of sliderToThreshold for placing the knob at a given threshold. */
export function thresholdToSlider(threshold: number): number {
  const t = Math.min(Math.max(threshold, THRESHOLD_MIN), THRESHOLD_MAX);
  return Math.log(t / THRESHOLD_MIN) / Math.log(THRESHOLD_MAX / THRESHOLD_MIN);
}

export interface SessionState {
  imageId: string | null;
  imageSize: { width: number; height: number } | null;
  clicks: PromptPoint[];
  threshold: number;
  /** Last mask decoded from the service RLE, at image-grid resolution. */
  mask: Uint8Array | null;
  overlayOpacity: number;
}

export class SessionStore {
  state: SessionState = {
    imageId: null,
    imageSize: null,
    clicks: [],
    threshold: DEFAULT_THRESHOLD,
    mask: null,
    overlayOpacity: 0.5,
  };

  private past: PromptPoint[][] = [];
  private future: PromptPoint[][] = [];

  /** Switch images: clicks, mask, and history reset; threshold persists. */
  selectImage(id: string, size: { width: number; height: number }): void {
    this.state.imageId = id;
    this.state.imageSize = size;
    this.state.clicks = [];
    this.state.mask = null;
    this.past = [];
    this.future = [];
  }

  /** Replace the click list, snapshotting the old one for undo. */
  setClicks(clicks: PromptPoint[]): void {
    this.past.push(this.state.clicks);
    this.future = [];
    this.state.clicks = clicks.map((p) => ({ ...p }));
  }

  addClick(p: PromptPoint): void {
    this.setClicks([...this.state.clicks, p]);
  }

  canUndo(): boolean {
    return this.past.length > 0;
  }

  canRedo(): boolean {
    return this.future.length > 0;
  }

  undo(): boolean {
    const prev = this.past.pop();
    if (prev === undefined) return false;
    this.future.push(this.state.clicks);
    this.state.clicks = prev;
    return true;
  }

  redo(): boolean {
    const next = this.future.pop();
    if (next === undefined) return false;
    this.past.push(this.state.clicks);
    this.state.clicks = next;
    return true;
  }

  setThreshold(threshold: number): void {
    if (!(threshold > 0) || !Number.isFinite(threshold)) {
      throw new Error(`threshold must be positive and finite, got ${threshold}`);
    }
    this.state.threshold = threshold;
  }

  setMask(mask: Uint8Array | null): void {
    this.state.mask = mask;
  }
}
