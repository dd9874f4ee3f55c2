"""Mask metrics and click-based evaluation protocols."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .field import validate_labels
from .prompting import DEFAULT_THRESHOLD, prompt_mask

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two boolean masks; two empty masks count as 1."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def center_point(mask: np.ndarray) -> tuple[int, int]:
    """Centroid of a mask snapped to its nearest true pixel, as (x, y).

    Distance ties resolve in row-major order, so the result is deterministic.
    """
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise ValueError("cannot take the center of an empty mask")
    cy = ys.mean()
    cx = xs.mean()
    d2 = (ys - cy) ** 2 + (xs - cx) ** 2
    k = int(np.argmin(d2))  # nonzero() lists pixels row-major; argmin keeps the first
    return int(xs[k]), int(ys[k])


def next_golden_point(gt: np.ndarray, pred: np.ndarray) -> tuple[int, int]:
    """Center of the largest 8-connected ground-truth region the prediction misses.

    Size ties resolve toward the component whose first pixel comes earliest in
    row-major order.  Raises if the prediction already covers the ground truth.
    """
    gt = np.asarray(gt, dtype=bool)
    pred = np.asarray(pred, dtype=bool)
    if gt.shape != pred.shape:
        raise ValueError(f"mask shapes differ: {gt.shape} vs {pred.shape}")
    uncovered = gt & ~pred
    if not uncovered.any():
        raise ValueError("nothing uncovered: prediction already contains the ground truth")
    comp, count = ndimage.label(uncovered, structure=EIGHT_CONNECTED)
    sizes = np.bincount(comp.ravel(), minlength=count + 1)
    best = max(sizes[1:])
    candidates = [i for i in range(1, count + 1) if sizes[i] == best]
    if len(candidates) > 1:
        flat = comp.ravel()
        candidates.sort(key=lambda i: int(np.argmax(flat == i)))
    return center_point(comp == candidates[0])


def iterative_prompt_eval(
    field: np.ndarray,
    labels: np.ndarray,
    max_clicks: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
    **prompt_kwargs,
) -> dict:
    """Golden-clicking evaluation of a field against its label map.

    For every instance the first prompt is its center point; each further
    prompt is the golden point against the current mask.  Once the mask covers
    the instance no more clicks are added and the IoU carries forward.  Returns
    per-instance IoU series and the per-click-count mean over instances.
    """
    n = validate_labels(labels)
    if n == 0:
        raise ValueError("label map has no instances to evaluate")
    if max_clicks < 1:
        raise ValueError("max_clicks must be >= 1")
    labels = np.asarray(labels)
    instances = []
    for i in range(1, n + 1):
        gt = labels == i
        clicks = [center_point(gt)]
        ious: list[float] = []
        while len(ious) < max_clicks:
            mask = prompt_mask(field, clicks, threshold=threshold, **prompt_kwargs)
            ious.append(mask_iou(mask, gt))
            if len(ious) == max_clicks:
                break
            uncovered = gt & ~mask
            if not uncovered.any():
                ious.extend([ious[-1]] * (max_clicks - len(ious)))
                break
            clicks.append(next_golden_point(gt, mask))
        instances.append({"id": i, "area": int(gt.sum()), "ious": ious, "clicks": clicks})
    mean_per_click = np.mean([rec["ious"] for rec in instances], axis=0)
    return {"mean_iou_per_click": mean_per_click, "instances": instances}
