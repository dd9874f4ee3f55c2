"""Batch evaluation reports: JSON summary, CSV detail, and rendered figures.

Each report writer takes a manifest, evaluates every entry, and writes three
sibling files derived from the requested report path: the JSON report itself,
a CSV with one row per measurement, and a PNG figure of the headline curve.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .dataio import load_labels, load_manifest, resolve_field
from .edges import edge_ap_at_recall, edge_pr_curve, edges_from_field, label_boundaries
from .metrics import iterative_prompt_eval
from .prompting import DEFAULT_THRESHOLD

logger = logging.getLogger(__name__)

# BSDS-style localization slack for edge matching, as a fraction of the
# image diagonal.
EDGE_TOLERANCE_FRACTION = 0.0075


def _sibling(report_path: Path, suffix: str) -> Path:
    return report_path.with_suffix(suffix)


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n")


def prompt_report(
    manifest_path,
    fields_dir=None,
    clicks: int = 1,
    report_path="prompt_report.json",
    threshold: float = DEFAULT_THRESHOLD,
) -> dict:
    """Iterative prompting evaluation over a dataset.

    Every instance gets up to ``clicks`` corrective clicks; the headline number
    is the mean IoU over all instances in the dataset at each click count.
    """
    report_path = Path(report_path)
    entries = load_manifest(manifest_path)
    images = []
    per_click_sums = np.zeros(clicks)
    instance_total = 0
    for entry in entries:
        labels, _ = load_labels(entry.labels_path)
        field = resolve_field(entry, fields_dir, labels)
        result = iterative_prompt_eval(field, labels, max_clicks=clicks, threshold=threshold)
        for inst in result["instances"]:
            per_click_sums += np.asarray(inst["ious"])
            instance_total += 1
        images.append(
            {
                "id": entry.id,
                "mean_iou_per_click": [float(v) for v in result["mean_iou_per_click"]],
                "instances": [
                    {
                        "id": int(inst["id"]),
                        "area": int(inst["area"]),
                        "ious": [float(v) for v in inst["ious"]],
                        "clicks": [[int(x), int(y)] for x, y in inst["clicks"]],
                    }
                    for inst in result["instances"]
                ],
            }
        )
    mean_curve = (per_click_sums / max(instance_total, 1)).tolist()
    payload = {
        "protocol": "iterative-prompt",
        "clicks": clicks,
        "threshold": threshold,
        "image_count": len(images),
        "instance_count": instance_total,
        "mean_iou_per_click": mean_curve,
        "images": images,
    }
    _write_json(report_path, payload)

    csv_path = _sibling(report_path, ".csv")
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "instance_id", "area", "click", "iou"])
        for img in images:
            for inst in img["instances"]:
                for k, iou in enumerate(inst["ious"], start=1):
                    writer.writerow([img["id"], inst["id"], inst["area"], k, f"{iou:.6f}"])

    fig_path = _sibling(report_path, ".png")
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(range(1, clicks + 1), mean_curve, marker="o")
    ax.set_xlabel("clicks")
    ax.set_ylabel("mean IoU")
    ax.set_ylim(0.0, 1.05)
    ax.set_xticks(range(1, clicks + 1))
    ax.set_title(f"Prompting IoU over {instance_total} instances")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    logger.info("wrote %s, %s, %s", report_path, csv_path, fig_path)
    return payload


def edge_report(
    manifest_path,
    fields_dir=None,
    r_max: float = 0.2,
    report_path="edge_report.json",
    tolerance: float | None = None,
) -> dict:
    """Edge precision/recall evaluation over a dataset.

    Predicted edges come from the thinned gradient of each field; ground truth
    is the label boundary set.  When ``tolerance`` is None it defaults to
    0.0075 x the image diagonal per image.
    """
    report_path = Path(report_path)
    entries = load_manifest(manifest_path)
    images = []
    ap_values = []
    curves = []
    for entry in entries:
        labels, _ = load_labels(entry.labels_path)
        field = resolve_field(entry, fields_dir, labels)
        gt = label_boundaries(labels)
        edge_map = edges_from_field(field)
        tol = tolerance
        if tol is None:
            h, w = labels.shape
            tol = EDGE_TOLERANCE_FRACTION * float(np.hypot(h, w))
        curve = edge_pr_curve(edge_map, gt, tolerance=tol)
        ap = edge_ap_at_recall(curve, r_max=r_max)
        ap_values.append(ap)
        curves.append(curve)
        images.append(
            {
                "id": entry.id,
                "tolerance": float(tol),
                "ap": float(ap),
                "thresholds": [float(v) for v in curve.thresholds],
                "recalls": [float(v) for v in curve.recalls],
                "precisions": [float(v) for v in curve.precisions],
            }
        )
    payload = {
        "protocol": "edge-pr",
        "r_max": r_max,
        "image_count": len(images),
        "mean_ap": float(np.mean(ap_values)) if ap_values else 0.0,
        "images": images,
    }
    _write_json(report_path, payload)

    csv_path = _sibling(report_path, ".csv")
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "threshold", "recall", "precision"])
        for img in images:
            for t, r, p in zip(img["thresholds"], img["recalls"], img["precisions"]):
                writer.writerow([img["id"], f"{t:.6f}", f"{r:.6f}", f"{p:.6f}"])

    fig_path = _sibling(report_path, ".png")
    fig, ax = plt.subplots(figsize=(5, 4))
    for img, curve in zip(images, curves):
        ax.plot(curve.recalls, curve.precisions, alpha=0.35, linewidth=1)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.05)
    ax.set_title(f"Edge PR ({len(images)} images, mean AP@{r_max:g} = {payload['mean_ap']:.3f})")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    logger.info("wrote %s, %s, %s", report_path, csv_path, fig_path)
    return payload
