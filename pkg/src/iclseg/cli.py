"""Command-line entry points for the full pipeline.

Subcommands cover scene generation, direct-field optimization, network
training, the gradient self-check, both batch evaluations, and the HTTP
service.  Errors exit with status 1 and a single-line diagnostic; the
``ICL_LOG`` environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys

import numpy as np

logger = logging.getLogger(__name__)

GRADCHECK_TOLERANCE = 1e-4


def _parse_size(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iclseg",
        description="Instance-coloring segmentation: generate, optimize, train, evaluate, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenes", help="generate a synthetic scene dataset")
    p.add_argument("--count", type=int, required=True, help="number of scenes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset directory")

    p = sub.add_parser("optimize", help="optimize a color field directly against labels")
    p.add_argument("--labels", required=True, help="label map PNG")
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=2.0)
    p.add_argument("--out", required=True, help="output field (.png writes an exact sidecar too)")

    p = sub.add_parser("train", help="train the small convolutional predictor")
    p.add_argument("--manifest", required=True)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--out", required=True, help="output checkpoint JSON")

    p = sub.add_parser("gradcheck", help="finite-difference check of the loss gradient")
    p.add_argument("--size", type=_parse_size, default=(8, 8), help="field size as WxH")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval-prompt", help="iterative prompting evaluation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fields", default=None, help="directory of per-image fields")
    p.add_argument("--clicks", type=int, default=1)
    p.add_argument("--report", required=True, help="output JSON (CSV and PNG written alongside)")

    p = sub.add_parser("eval-edges", help="edge precision/recall evaluation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fields", default=None, help="directory of per-image fields")
    p.add_argument("--rmax", type=float, default=0.2)
    p.add_argument("--report", required=True, help="output JSON (CSV and PNG written alongside)")

    p = sub.add_parser("serve", help="run the HTTP prompting service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fields", default=None, help="directory of per-image fields")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--threads", type=int, default=4, help="prompting worker pool size")

    return parser


def _cmd_gen_scenes(args) -> int:
    from .scenes import generate_dataset

    manifest = generate_dataset(args.out, args.count, seed=args.seed)
    print(f"wrote {args.count} scenes, manifest {manifest}")
    return 0


def _cmd_optimize(args) -> int:
    from .dataio import load_labels, save_field
    from .optim import OptimConfig, optimize_direct_field

    labels, remap = load_labels(args.labels)
    if remap:
        logger.info("compacted label ids: %s", remap)
    config = OptimConfig(iterations=args.iters, learning_rate=args.lr, seed=args.seed)
    field, trace = optimize_direct_field(labels, config=config)
    save_field(field, args.out, exact=True)
    first, last = trace.reports[0].total, trace.reports[-1].total
    print(f"optimized {args.iters} iterations: loss {first:.4f} -> {last:.4f}, wrote {args.out}")
    return 0


def _cmd_train(args) -> int:
    from .dataio import load_field, load_labels, load_manifest
    from .optim import OptimConfig
    from .tinynet import save_checkpoint, train_tiny_net

    dataset = []
    for entry in load_manifest(args.manifest):
        image = load_field(entry.image_path)
        labels, _ = load_labels(entry.labels_path)
        dataset.append((image, labels))
    config = OptimConfig(iterations=args.iters, learning_rate=args.lr, seed=args.seed)
    net, trace = train_tiny_net(dataset, config=config)
    save_checkpoint(net, args.out)
    first, last = trace.reports[0].total, trace.reports[-1].total
    print(f"trained {args.iters} steps: loss {first:.4f} -> {last:.4f}, wrote {args.out}")
    return 0


def _cmd_gradcheck(args) -> int:
    from .optim import finite_difference_check, sample_check_case

    width, height = args.size
    rng = np.random.default_rng(args.seed)
    field, labels = sample_check_case(width, height, rng)
    err = finite_difference_check(field, labels)
    print(f"max relative gradient error: {err:.3e}")
    return 0 if err < GRADCHECK_TOLERANCE else 1


def _cmd_eval_prompt(args) -> int:
    from .reports import prompt_report

    payload = prompt_report(
        args.manifest, args.fields, clicks=args.clicks, report_path=args.report
    )
    curve = ", ".join(f"{v:.4f}" for v in payload["mean_iou_per_click"])
    print(f"mean IoU per click over {payload['instance_count']} instances: {curve}")
    return 0


def _cmd_eval_edges(args) -> int:
    from .reports import edge_report

    payload = edge_report(args.manifest, args.fields, r_max=args.rmax, report_path=args.report)
    print(f"mean AP@{args.rmax:g} over {payload['image_count']} images: {payload['mean_ap']:.4f}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.manifest, args.fields, threads=args.threads)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "gen-scenes": _cmd_gen_scenes,
    "optimize": _cmd_optimize,
    "train": _cmd_train,
    "gradcheck": _cmd_gradcheck,
    "eval-prompt": _cmd_eval_prompt,
    "eval-edges": _cmd_eval_edges,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("ICL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # single-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        logger.debug("traceback", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
