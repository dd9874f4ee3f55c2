/**
 * Run-length coding of binary masks, matching the service wire format:
 * row-major scan, alternating run counts starting with zeros.  A mask whose
 * first pixel is set therefore starts with a 0 count.
 */

/** Decode run counts into a flat 0/1 mask of exactly width*height pixels. */
export function decodeMask(counts: number[], width: number, height: number): Uint8Array {
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new Error(`invalid mask size ${width}x${height}`);
  }
  const total = width * height;
  const mask = new Uint8Array(total);
  let at = 0;
  let value = 0;
  for (const count of counts) {
    if (!Number.isInteger(count) || count < 0) {
      throw new Error(`invalid run count ${count}`);
    }
    if (value === 1) {
      mask.fill(1, at, at + count);
    }
    at += count;
    value ^= 1;
  }
  if (at !== total) {
    throw new Error(`run counts sum to ${at}, expected ${total} for ${width}x${height}`);
  }
  return mask;
}

/** Encode a flat 0/1 mask as run counts (zeros first). */
export function encodeMask(mask: ArrayLike<number>): number[] {
  const counts: number[] = [];
  let value = 0;
  let run = 0;
  for (let i = 0; i < mask.length; i++) {
    const bit = mask[i] ? 1 : 0;
    if (bit === value) {
      run++;
    } else {
      counts.push(run);
      value = bit;
      run = 1;
    }
  }
  counts.push(run);
  return counts;
}
