"""Color fields, instance label maps, and per-instance statistics.

A color field is an ``(H, W, 3)`` float64 array of per-pixel colors on the
[0, 255] scale.  A label map is an ``(H, W)`` integer array of instance ids
where id 0 is background and the instance ids present are exactly
``{1, ..., n}`` with no gaps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

COLOR_SCALE = 255.0

# Default minimum pairwise RGB distance (also vs. black) for ground-truth
# colorings.  255/3 is the largest color distance whose similarity 1/d still
# clears the default prompt threshold of 3/255, so staying above it keeps
# point-prompt masks exact on ideal colorings; 96 leaves headroom.  The
# documented contract only promises >= 48.
DEFAULT_SEPARATION = 96.0


def validate_field(field: np.ndarray) -> np.ndarray:
    """Check that ``field`` is a finite (H, W, 3) array and return it as float64."""
    field = np.asarray(field, dtype=np.float64)
    if field.ndim != 3 or field.shape[2] != 3:
        raise ValueError(f"color field must have shape (H, W, 3), got {field.shape}")
    if not np.all(np.isfinite(field)):
        raise ValueError("color field contains non-finite values")
    return field


def validate_labels(labels: np.ndarray) -> int:
    """Check label-map invariants and return the instance count n.

    Ids must be non-negative integers and the instance ids present must be
    exactly {1..n}; raises with the first missing id otherwise.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError(f"label map must be 2-D, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValueError(f"label map must be integer-typed, got {labels.dtype}")
    if labels.size == 0:
        raise ValueError("label map is empty")
    if labels.min() < 0:
        raise ValueError("label map contains negative ids")
    n = int(labels.max())
    present = np.bincount(labels.ravel(), minlength=n + 1) > 0
    for i in range(1, n + 1):
        if not present[i]:
            raise ValueError(f"label map ids are not contiguous: missing id {i}")
    return n


@dataclass
class InstanceStats:
    """Per-instance pixel counts and mean colors for ids 0..n.

    ``sizes[i]`` is |S_i| (pixels of instance i, i=0 background) and
    ``complements[i]`` is |T_i| (all other pixels).  ``means[i]`` is the mean
    predicted color over S_i for i >= 1; ``means[0]`` is fixed to black
    regardless of the background pixels' contents.
    """

    n: int
    sizes: np.ndarray
    complements: np.ndarray
    means: np.ndarray | None = None


def instance_pixel_sets(labels: np.ndarray) -> InstanceStats:
    """Pixel counts |S_i| and complement sizes |T_i| for ids 0..n."""
    n = validate_labels(labels)
    sizes = np.bincount(np.asarray(labels).ravel(), minlength=n + 1).astype(np.int64)
    complements = labels.size - sizes
    return InstanceStats(n=n, sizes=sizes, complements=complements)


def instance_means(field: np.ndarray, labels: np.ndarray) -> InstanceStats:
    """Per-instance mean colors; the background mean is pinned to black."""
    field = validate_field(field)
    labels = np.asarray(labels)
    if field.shape[:2] != labels.shape:
        raise ValueError(
            f"field {field.shape[:2]} and labels {labels.shape} disagree on size"
        )
    stats = instance_pixel_sets(labels)
    flat = labels.ravel()
    sums = np.zeros((stats.n + 1, 3))
    for c in range(3):
        # bincount accumulates in row-major traversal order, which keeps the
        # reduction order fixed and runs bit-reproducible.
        sums[:, c] = np.bincount(flat, weights=field[..., c].ravel(), minlength=stats.n + 1)
    counts = np.maximum(stats.sizes, 1)[:, None]
    means = sums / counts
    means[0] = 0.0
    stats.means = means
    return stats


def instance_palette(
    n: int, seed: int, separation: float = DEFAULT_SEPARATION
) -> tuple[np.ndarray, float]:
    """Draw n instance colors with pairwise (and vs. black) distance >= separation.

    Colors are sampled uniformly on the integer RGB lattice by rejection; after
    1000 failed attempts for a color the best candidate seen (largest minimum
    distance) is kept, so the result degrades gracefully when n is too large
    for the requested separation.  Returns ``(colors, achieved_min_distance)``.
    """
    rng = np.random.default_rng(seed)
    chosen = [np.zeros(3)]  # black: the background color every instance must avoid
    achieved = np.inf
    for _ in range(n):
        best, best_dist = None, -1.0
        for _attempt in range(1000):
            cand = rng.integers(0, 256, size=3).astype(np.float64)
            dist = min(float(np.linalg.norm(cand - c)) for c in chosen)
            if dist >= separation:
                best, best_dist = cand, dist
                break
            if dist > best_dist:
                best, best_dist = cand, dist
        chosen.append(best)
        achieved = min(achieved, best_dist)
    colors = np.stack(chosen[1:]) if n else np.zeros((0, 3))
    if achieved < separation:
        logger.warning(
            "instance palette for n=%d reached min separation %.1f < requested %.1f",
            n, achieved, separation,
        )
    return colors, float(achieved)


def encode_labels_as_colors(
    labels: np.ndarray, seed: int = 0, separation: float = DEFAULT_SEPARATION
) -> np.ndarray:
    """Paint a label map as an ideal color field: black background, one flat
    well-separated color per instance."""
    n = validate_labels(labels)
    colors, _ = instance_palette(n, seed, separation)
    palette = np.concatenate([np.zeros((1, 3)), colors], axis=0)
    return palette[np.asarray(labels)]


def normalize_field(raw: np.ndarray) -> np.ndarray:
    """Affinely map a raw field onto [0, 255] by its joint min/max.

    The same affine map is applied to all three channels so relative color
    geometry is preserved.  A constant input maps to all zeros.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if not np.all(np.isfinite(raw)):
        raise ValueError("cannot normalize a field with non-finite values")
    lo = raw.min()
    hi = raw.max()
    if hi == lo:
        return np.zeros_like(raw)
    # divide before scaling so the extremes land on exactly 0 and 255
    return (raw - lo) / (hi - lo) * COLOR_SCALE


def normalize_field_backward(raw: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    """Backpropagate through ``normalize_field``.

    The min and max are treated as functions of their first-occurring
    coordinates (a subgradient at ties); a constant input has an all-zero
    output and gets a zero gradient.
    """
    raw = np.asarray(raw, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    lo_idx = int(np.argmin(raw))
    hi_idx = int(np.argmax(raw))
    lo = raw.flat[lo_idx]
    hi = raw.flat[hi_idx]
    if hi == lo:
        return np.zeros_like(raw)
    scale = COLOR_SCALE / (hi - lo)
    grad = scale * grad_out
    gsum = grad_out.sum()
    corr = scale * float((grad_out * (raw - lo)).sum()) / (hi - lo)
    grad.flat[hi_idx] -= corr
    grad.flat[lo_idx] += corr - scale * gsum
    return grad
