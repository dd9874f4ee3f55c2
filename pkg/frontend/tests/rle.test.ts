import { describe, expect, it } from "vitest";

import { decodeMask, encodeMask } from "../src/rle.js";

/** Small deterministic PRNG so round-trip cases are reproducible. */
function xorshift(seed: number): () => number {
  let s = seed >>> 0 || 1;
  return () => {
    s ^= s << 13;
    s ^= s >>> 17;
    s ^= s << 5;
    s >>>= 0;
    return s / 0xffffffff;
  };
}

describe("decodeMask", () => {
  it("decodes [3, 2, 1] on a 2x3 grid to pixels 3 and 4", () => {
    const mask = decodeMask([3, 2, 1], 2, 3);
    expect(Array.from(mask)).toEqual([0, 0, 0, 1, 1, 0]);
  });

  it("starts runs with zeros: a leading set pixel needs a 0 count", () => {
    const mask = decodeMask([0, 2, 2], 2, 2);
    expect(Array.from(mask)).toEqual([1, 1, 0, 0]);
  });

  it("rejects counts that do not cover the grid", () => {
    expect(() => decodeMask([3, 2], 2, 3)).toThrow(/sum to 5/);
    expect(() => decodeMask([3, 2, 1, 1], 2, 3)).toThrow(/sum to 7/);
  });

  it("rejects negative and fractional counts", () => {
    expect(() => decodeMask([-1, 7], 2, 3)).toThrow(/invalid run count/);
    expect(() => decodeMask([3.5, 2.5], 2, 3)).toThrow(/invalid run count/);
  });

  it("rejects empty grids", () => {
    expect(() => decodeMask([], 0, 3)).toThrow(/invalid mask size/);
  });
});

describe("encodeMask", () => {
  it("emits the zeros run first even when empty", () => {
    expect(encodeMask([1, 1, 0])).toEqual([0, 2, 1]);
    expect(encodeMask([0, 0, 1])).toEqual([2, 1]);
    expect(encodeMask([0, 0, 0])).toEqual([3]);
  });

  it("round-trips random masks exactly", () => {
    const rand = xorshift(42);
    for (let trial = 0; trial < 50; trial++) {
      const width = 1 + Math.floor(rand() * 12);
      const height = 1 + Math.floor(rand() * 12);
      const mask = new Uint8Array(width * height);
      for (let i = 0; i < mask.length; i++) mask[i] = rand() < 0.4 ? 1 : 0;
      const counts = encodeMask(mask);
      expect(counts.reduce((a, b) => a + b, 0)).toBe(width * height);
      expect(decodeMask(counts, width, height)).toEqual(mask);
    }
  });
});
