import { describe, expect, it } from "vitest";

import { maskToRgba } from "../src/overlay.js";

describe("maskToRgba", () => {
  it("colors set pixels and leaves unset pixels fully transparent", () => {
    const rgba = maskToRgba([0, 1, 0, 1], 2, 2, [10, 20, 30], 0.5);
    expect(rgba.length).toBe(16);
    expect(Array.from(rgba.slice(0, 4))).toEqual([0, 0, 0, 0]);
    expect(Array.from(rgba.slice(4, 8))).toEqual([10, 20, 30, 128]);
    expect(Array.from(rgba.slice(8, 12))).toEqual([0, 0, 0, 0]);
    expect(Array.from(rgba.slice(12, 16))).toEqual([10, 20, 30, 128]);
  });

  it("clamps opacity into [0, 1]", () => {
    expect(maskToRgba([1], 1, 1, [1, 2, 3], 4)[3]).toBe(255);
    expect(maskToRgba([1], 1, 1, [1, 2, 3], -1)[3]).toBe(0);
  });

  it("rejects size mismatches", () => {
    expect(() => maskToRgba([1, 0], 2, 2)).toThrow(/expected 4/);
  });
});
