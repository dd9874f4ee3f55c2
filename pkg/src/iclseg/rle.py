"""Run-length encoding for binary masks.

Masks are flattened row-major and encoded as alternating run counts, always
starting with the count of leading zeros (possibly 0).  Counts sum to the
pixel total, so the shape plus the counts reconstruct the mask exactly.
"""

from __future__ import annotations

import numpy as np


def encode_mask(mask: np.ndarray) -> list[int]:
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.dtype != bool:
        raise ValueError(f"expected 2-D boolean mask, got {mask.dtype} {mask.shape}")
    flat = mask.ravel().astype(np.int8)
    if flat.size == 0:
        return [0]
    change = np.flatnonzero(np.diff(flat)) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    counts = np.diff(bounds).tolist()
    if flat[0] == 1:
        counts.insert(0, 0)
    return [int(c) for c in counts]


def decode_mask(counts: list[int], height: int, width: int) -> np.ndarray:
    total = height * width
    if any((not isinstance(c, (int, np.integer))) or c < 0 for c in counts):
        raise ValueError("run counts must be non-negative integers")
    if sum(counts) != total:
        raise ValueError(f"run counts sum to {sum(counts)}, expected {total}")
    flat = np.zeros(total, dtype=bool)
    pos = 0
    value = False
    for c in counts:
        if value:
            flat[pos : pos + c] = True
        pos += c
        value = not value
    return flat.reshape(height, width)
