"""Point-prompted mask extraction from color fields.

A prompt point is turned into a query color by a small Gaussian-weighted
average of the field around the point, compared against every pixel with a
saturating inverse-distance similarity, normalized to [0, 1], smoothed with a
joint bilateral filter guided by the field, and finally thresholded.  Several
points merge by per-pixel maximum before thresholding.
"""

from __future__ import annotations

import math

import numpy as np

from .field import validate_field

DEFAULT_THRESHOLD = 3.0 / 255.0
DEFAULT_WINDOW = 9
DEFAULT_SIGMA_SPATIAL = 2.25
DEFAULT_SIGMA_RANGE = 10.0


def gaussian_sigmas(width: int, height: int) -> tuple[float, float]:
    """Query-window standard deviations: 1% of each image dimension."""
    return 0.01 * width, 0.01 * height


def gaussian_radii(width: int, height: int) -> tuple[int, int]:
    """Query-window truncation radii: +-3 sigma, never below one pixel."""
    sx, sy = gaussian_sigmas(width, height)
    return max(1, math.ceil(3.0 * sx)), max(1, math.ceil(3.0 * sy))


def _check_point(point, width, height):
    x, y = point
    if not (float(x).is_integer() and float(y).is_integer()):
        raise ValueError(f"prompt point must have integer coordinates, got {point}")
    x, y = int(x), int(y)
    if not (0 <= x < width and 0 <= y < height):
        raise ValueError(f"prompt point {point} outside {width}x{height} image")
    return x, y


def query_vector(field: np.ndarray, point) -> np.ndarray:
    """Gaussian-weighted average color around an (x, y) prompt point."""
    field = validate_field(field)
    h, w = field.shape[:2]
    x0, y0 = _check_point(point, w, h)
    sx, sy = gaussian_sigmas(w, h)
    rx, ry = gaussian_radii(w, h)
    xs = np.arange(max(0, x0 - rx), min(w, x0 + rx + 1))
    ys = np.arange(max(0, y0 - ry), min(h, y0 + ry + 1))
    wx = np.exp(-((xs - x0) ** 2) / (2.0 * sx * sx))
    wy = np.exp(-((ys - y0) ** 2) / (2.0 * sy * sy))
    weights = wy[:, None] * wx[None, :]
    patch = field[ys[0] : ys[-1] + 1, xs[0] : xs[-1] + 1]
    return np.einsum("yx,yxc->c", weights, patch) / weights.sum()


def similarity_map_raw(field: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Saturating inverse-distance similarity min(1, 1/||F - q||) per pixel.

    Distances of at most one color unit count as a perfect match (value 1),
    which also keeps the map finite at exact hits.
    """
    field = validate_field(field)
    query = np.asarray(query, dtype=np.float64).reshape(3)
    d = np.sqrt(((field - query) ** 2).sum(axis=-1))
    out = np.ones_like(d)
    far = d > 1.0
    out[far] = 1.0 / d[far]
    return out


def similarity_map(field: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Raw similarity min-max normalized onto [0, 1]; constant maps become all ones."""
    raw = similarity_map_raw(field, query)
    lo = raw.min()
    hi = raw.max()
    if hi == lo:
        return np.ones_like(raw)
    return (raw - lo) / (hi - lo)


def joint_bilateral_smooth(
    values: np.ndarray,
    guide: np.ndarray,
    window: int = DEFAULT_WINDOW,
    sigma_spatial: float = DEFAULT_SIGMA_SPATIAL,
    sigma_range: float = DEFAULT_SIGMA_RANGE,
) -> np.ndarray:
    """Joint bilateral filter of a scalar map, range-weighted by a color guide.

    Border pixels renormalize over the neighbors that exist, so the filter is
    well defined up to the image edge.  ``window`` must be odd; a window of 1
    is the identity.
    """
    values = np.asarray(values, dtype=np.float64)
    guide = validate_field(guide)
    if values.shape != guide.shape[:2]:
        raise ValueError("values and guide disagree on image size")
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and positive, got {window}")
    half = window // 2
    h, w = values.shape
    num = np.zeros_like(values)
    den = np.zeros_like(values)
    inv2s = 1.0 / (2.0 * sigma_spatial * sigma_spatial)
    inv2r = 1.0 / (2.0 * sigma_range * sigma_range)
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            ws = math.exp(-(dx * dx + dy * dy) * inv2s)
            dst = (slice(max(0, -dy), h - max(0, dy)), slice(max(0, -dx), w - max(0, dx)))
            src = (slice(max(0, dy), h + min(0, dy)), slice(max(0, dx), w + min(0, dx)))
            cd2 = ((guide[src] - guide[dst]) ** 2).sum(axis=-1)
            wr = ws * np.exp(-cd2 * inv2r)
            num[dst] += wr * values[src]
            den[dst] += wr
    return num / den


def prompt_similarity(
    field: np.ndarray,
    points,
    window: int = DEFAULT_WINDOW,
    sigma_spatial: float = DEFAULT_SIGMA_SPATIAL,
    sigma_range: float = DEFAULT_SIGMA_RANGE,
) -> np.ndarray:
    """Smoothed similarity map for a set of prompt points, merged by maximum."""
    field = validate_field(field)
    if len(points) == 0:
        raise ValueError("at least one prompt point is required")
    merged = None
    for point in points:
        q = query_vector(field, point)
        sim = similarity_map(field, q)
        sim = joint_bilateral_smooth(sim, field, window, sigma_spatial, sigma_range)
        merged = sim if merged is None else np.maximum(merged, sim)
    return merged


def prompt_mask(
    field: np.ndarray,
    points,
    threshold: float = DEFAULT_THRESHOLD,
    window: int = DEFAULT_WINDOW,
    sigma_spatial: float = DEFAULT_SIGMA_SPATIAL,
    sigma_range: float = DEFAULT_SIGMA_RANGE,
) -> np.ndarray:
    """Boolean mask of pixels whose merged similarity strictly exceeds the threshold."""
    merged = prompt_similarity(field, points, window, sigma_spatial, sigma_range)
    return merged > threshold
