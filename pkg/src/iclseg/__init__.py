"""Instance-coloring segmentation toolkit.

Optimizes per-pixel color fields so that instances become flat, well
separated color regions, then turns clicks on those fields into instance
masks.  Includes synthetic scene generation, a small convolutional
predictor, edge and prompting evaluations, a CLI, and an HTTP service.
"""

from .dataio import (
    ManifestEntry,
    load_field,
    load_labels,
    load_manifest,
    rasterize_polygons,
    resolve_field,
    save_field,
    save_labels,
    save_manifest,
)
from .edges import (
    EdgeMap,
    PRCurve,
    edge_ap_at_recall,
    edge_pr_curve,
    edges_from_field,
    label_boundaries,
)
from .field import (
    encode_labels_as_colors,
    instance_means,
    instance_palette,
    normalize_field,
    validate_field,
    validate_labels,
)
from .loss import (
    LossReport,
    LossWeights,
    apply_instance_cap,
    loss_gradient,
    loss_mean,
    loss_sep,
    loss_total,
    loss_var,
)
from .metrics import center_point, iterative_prompt_eval, mask_iou, next_golden_point
from .optim import (
    OptimConfig,
    TrainTrace,
    finite_difference_check,
    optimize_direct_field,
    sample_check_case,
)
from .prompting import (
    joint_bilateral_smooth,
    prompt_mask,
    prompt_similarity,
    similarity_map,
    similarity_map_raw,
)
from .rle import decode_mask, encode_mask
from .scenes import SceneSpec, generate_dataset, generate_scene
from .tinynet import TinyNet, load_checkpoint, predict, save_checkpoint, train_tiny_net

__version__ = "0.1.0"

__all__ = [
    "EdgeMap",
    "LossReport",
    "LossWeights",
    "ManifestEntry",
    "OptimConfig",
    "PRCurve",
    "SceneSpec",
    "TinyNet",
    "TrainTrace",
    "apply_instance_cap",
    "center_point",
    "decode_mask",
    "edge_ap_at_recall",
    "edge_pr_curve",
    "edges_from_field",
    "encode_labels_as_colors",
    "encode_mask",
    "finite_difference_check",
    "generate_dataset",
    "generate_scene",
    "instance_means",
    "instance_palette",
    "iterative_prompt_eval",
    "joint_bilateral_smooth",
    "label_boundaries",
    "load_checkpoint",
    "load_field",
    "load_labels",
    "load_manifest",
    "loss_gradient",
    "loss_mean",
    "loss_sep",
    "loss_total",
    "loss_var",
    "mask_iou",
    "next_golden_point",
    "normalize_field",
    "optimize_direct_field",
    "predict",
    "prompt_mask",
    "prompt_similarity",
    "rasterize_polygons",
    "resolve_field",
    "save_checkpoint",
    "save_field",
    "save_labels",
    "save_manifest",
    "similarity_map",
    "similarity_map_raw",
    "train_tiny_net",
    "validate_field",
    "validate_labels",
]
