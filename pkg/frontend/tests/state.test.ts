import { describe, expect, it } from "vitest";

import {
  DEFAULT_THRESHOLD,
  SessionStore,
  sliderToThreshold,
  thresholdToSlider,
  THRESHOLD_MAX,
  THRESHOLD_MIN,
} from "../src/state.js";

describe("threshold slider mapping", () => {
  it("defaults to 3/255", () => {
    expect(DEFAULT_THRESHOLD).toBeCloseTo(3 / 255, 12);
    const knob = thresholdToSlider(DEFAULT_THRESHOLD);
    expect(knob).toBeGreaterThan(0);
    expect(knob).toBeLessThan(1);
    expect(sliderToThreshold(knob)).toBeCloseTo(DEFAULT_THRESHOLD, 12);
  });

  it("covers the full range at the slider ends", () => {
    expect(sliderToThreshold(0)).toBeCloseTo(THRESHOLD_MIN, 12);
    expect(sliderToThreshold(1)).toBeCloseTo(THRESHOLD_MAX, 12);
  });

  it("is monotone increasing on a log scale", () => {
    let prev = 0;
    for (let i = 0; i <= 20; i++) {
      const t = sliderToThreshold(i / 20);
      expect(t).toBeGreaterThan(prev);
      prev = t;
    }
  });

  it("round-trips knob positions", () => {
    for (let i = 0; i <= 10; i++) {
      const v = i / 10;
      expect(thresholdToSlider(sliderToThreshold(v))).toBeCloseTo(v, 10);
    }
  });
});

describe("SessionStore", () => {
  const a = { x: 1, y: 2 };
  const b = { x: 3, y: 4 };
  const c = { x: 5, y: 6 };

  it("undo then redo restores the exact click list", () => {
    const store = new SessionStore();
    store.selectImage("scene_0000", { width: 64, height: 64 });
    store.addClick(a);
    store.addClick(b);
    store.addClick(c);
    const full = store.state.clicks.map((p) => ({ ...p }));

    expect(store.undo()).toBe(true);
    expect(store.state.clicks).toEqual([a, b]);
    expect(store.undo()).toBe(true);
    expect(store.state.clicks).toEqual([a]);
    expect(store.redo()).toBe(true);
    expect(store.redo()).toBe(true);
    expect(store.state.clicks).toEqual(full);
    expect(store.redo()).toBe(false);
  });

  it("a new click after undo discards the redo branch", () => {
    const store = new SessionStore();
    store.selectImage("scene_0000", { width: 64, height: 64 });
    store.addClick(a);
    store.addClick(b);
    store.undo();
    store.addClick(c);
    expect(store.state.clicks).toEqual([a, c]);
    expect(store.canRedo()).toBe(false);
    store.undo();
    expect(store.state.clicks).toEqual([a]);
  });

  it("undo on an empty history reports false", () => {
    const store = new SessionStore();
    expect(store.undo()).toBe(false);
    expect(store.canUndo()).toBe(false);
  });

  it("switching images resets clicks, mask, and history", () => {
    const store = new SessionStore();
    store.selectImage("scene_0000", { width: 64, height: 64 });
    store.addClick(a);
    store.setMask(new Uint8Array(64 * 64));
    store.selectImage("scene_0001", { width: 32, height: 32 });
    expect(store.state.clicks).toEqual([]);
    expect(store.state.mask).toBeNull();
    expect(store.canUndo()).toBe(false);
    expect(store.state.imageSize).toEqual({ width: 32, height: 32 });
  });

  it("keeps the threshold across image switches", () => {
    const store = new SessionStore();
    store.setThreshold(0.25);
    store.selectImage("scene_0001", { width: 32, height: 32 });
    expect(store.state.threshold).toBe(0.25);
  });

  it("rejects invalid thresholds", () => {
    const store = new SessionStore();
    expect(() => store.setThreshold(0)).toThrow(/threshold/);
    expect(() => store.setThreshold(Number.NaN)).toThrow(/threshold/);
  });
});
