"""Procedural scenes: flat-colored shapes on a flat background.

Scenes are drawn painter's style (later shapes occlude earlier ones) and every
shape must stay usable after occlusion: at least ``min_visible`` pixels remain
and, by default, the query window around the visible region's center point is
entirely inside the region, which keeps point prompts on the scene pure.
Shapes violating either rule are re-drawn.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .metrics import center_point
from .prompting import gaussian_radii

SHAPE_KINDS = ("rectangle", "circle", "triangle")


@dataclass
class SceneSpec:
    width: int = 64
    height: int = 64
    shape_count: tuple[int, int] = (2, 6)
    kinds: tuple[str, ...] = SHAPE_KINDS
    fill: str = "flat"  # "flat" or "two_tone"
    seed: int = 0
    min_visible: int = 4
    color_separation: float = 32.0
    size_range: tuple[float, float] = (0.16, 0.36)  # half-extent as fraction of min dim
    prompt_safe: bool = True

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ValueError("scenes must be at least 8x8")
        lo, hi = self.shape_count
        if not (1 <= lo <= hi):
            raise ValueError(f"invalid shape_count range {self.shape_count}")
        for k in self.kinds:
            if k not in SHAPE_KINDS:
                raise ValueError(f"unknown shape kind {k!r}")
        if self.fill not in ("flat", "two_tone"):
            raise ValueError(f"unknown fill mode {self.fill!r}")


def _shape_mask(rng: np.random.Generator, spec: SceneSpec) -> np.ndarray:
    h, w = spec.height, spec.width
    base = min(w, h)
    lo = max(2.0, spec.size_range[0] * base)
    hi = max(lo + 1.0, spec.size_range[1] * base)
    kind = spec.kinds[rng.integers(0, len(spec.kinds))]
    cx = rng.uniform(0, w)
    cy = rng.uniform(0, h)
    yy, xx = np.mgrid[0:h, 0:w]
    if kind == "rectangle":
        a = rng.uniform(lo, hi)
        b = rng.uniform(lo, hi)
        return (np.abs(xx - cx) <= a) & (np.abs(yy - cy) <= b)
    if kind == "circle":
        r = rng.uniform(lo, hi)
        return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    # Triangle: three vertices spread around the center, re-drawn by the
    # caller if too thin to satisfy the visibility rules.
    angles = np.sort(rng.uniform(0, 2 * np.pi, size=3))
    radii = rng.uniform(lo, hi, size=3) * 1.3
    vx = cx + radii * np.cos(angles)
    vy = cy + radii * np.sin(angles)
    inside = np.ones((h, w), dtype=bool)
    for i in range(3):
        x1, y1 = vx[i], vy[i]
        x2, y2 = vx[(i + 1) % 3], vy[(i + 1) % 3]
        cross = (x2 - x1) * (yy - y1) - (y2 - y1) * (xx - x1)
        inside &= cross >= 0
    return inside


def _window_clean(mask: np.ndarray, rx: int, ry: int) -> bool:
    """True when the query window at the mask's center point stays inside it."""
    h, w = mask.shape
    x, y = center_point(mask)
    window = mask[max(0, y - ry) : min(h, y + ry + 1), max(0, x - rx) : min(w, x + rx + 1)]
    return bool(window.all())


def _visible_ok(canvas: np.ndarray, count: int, spec: SceneSpec, rx: int, ry: int) -> bool:
    for i in range(1, count + 1):
        vis = canvas == i
        if vis.sum() < spec.min_visible:
            return False
        if spec.prompt_safe and not _window_clean(vis, rx, ry):
            return False
    return True


def _palette(rng: np.random.Generator, count: int, separation: float) -> np.ndarray:
    """count+1 colors (background first) pairwise separated; best-effort on failure."""
    chosen: list[np.ndarray] = []
    for _ in range(count + 1):
        best, best_dist = None, -1.0
        for _attempt in range(1000):
            cand = rng.integers(0, 256, size=3).astype(np.float64)
            dist = min((float(np.linalg.norm(cand - c)) for c in chosen), default=np.inf)
            if dist >= separation:
                best = cand
                break
            if dist > best_dist:
                best, best_dist = cand, dist
        chosen.append(best)
    return np.stack(chosen)


def generate_scene(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    """Render one scene; returns (image, labels) with labels in draw order."""
    rng = np.random.default_rng(spec.seed)
    h, w = spec.height, spec.width
    rx, ry = gaussian_radii(w, h)
    count = int(rng.integers(spec.shape_count[0], spec.shape_count[1] + 1))
    canvas = np.zeros((h, w), dtype=np.int32)
    placed = 0
    while placed < count:
        for _attempt in range(1000):
            mask = _shape_mask(rng, spec)
            trial = canvas.copy()
            trial[mask] = placed + 1
            if _visible_ok(trial, placed + 1, spec, rx, ry):
                canvas = trial
                placed += 1
                break
        else:
            raise RuntimeError(
                f"could not place shape {placed + 1} of {count} after 1000 attempts"
            )
    palette = _palette(rng, count, spec.color_separation)
    image = palette[canvas].astype(np.float64)
    if spec.fill == "two_tone":
        yy, xx = np.mgrid[0:h, 0:w]
        checker = ((yy // 2) + (xx // 2)) % 2 == 1
        for i in range(1, count + 1):
            delta = rng.integers(10, 19, size=3).astype(np.float64)
            delta *= np.where(palette[i] > 127.5, -1.0, 1.0)
            tone = (canvas == i) & checker
            image[tone] += delta
    return image, canvas


def generate_dataset(out_dir, count: int, template: SceneSpec | None = None, seed: int = 0):
    """Write ``count`` scenes plus a manifest under ``out_dir``; returns the manifest path.

    Scene ``i`` uses seed ``seed + i``, so regeneration with the same arguments
    is byte-identical.
    """
    from . import dataio  # deferred: dataio pulls in PIL

    template = template or SceneSpec()
    out = dataio.ensure_dir(out_dir)
    images_dir = dataio.ensure_dir(out / "images")
    labels_dir = dataio.ensure_dir(out / "labels")
    entries = []
    for i in range(count):
        scene_id = f"scene_{i:04d}"
        image, labels = generate_scene(replace(template, seed=seed + i))
        image_path = images_dir / f"{scene_id}.png"
        labels_path = labels_dir / f"{scene_id}.png"
        dataio.save_field(image, image_path)
        dataio.save_labels(labels, labels_path)
        entries.append(
            dataio.ManifestEntry(
                id=scene_id,
                image_path=f"images/{scene_id}.png",
                labels_path=f"labels/{scene_id}.png",
            )
        )
    manifest_path = out / "manifest.json"
    dataio.save_manifest(entries, manifest_path)
    return manifest_path
