"""Regenerate prompt_fixture.json from the installed iclseg package.

The fixture freezes a scripted click sequence on an ideal coloring: for each
step it stores the clicks, the threshold, the run-length counts exactly as
the prompting service would return them, and the decoded pixels.  The
TypeScript tests then verify that the client-side decoder reproduces the
pixels bit-for-bit and that threshold/merge monotonicity carries over.

Usage: python3 generate.py
"""

import json
from pathlib import Path

from iclseg.field import encode_labels_as_colors
from iclseg.metrics import center_point
from iclseg.prompting import DEFAULT_THRESHOLD, prompt_mask
from iclseg.rle import encode_mask
from iclseg.scenes import SceneSpec, generate_scene


def main() -> None:
    spec = SceneSpec(seed=7)
    _, labels = generate_scene(spec)
    assert labels.max() >= 2, "fixture scene needs at least two instances"
    field = encode_labels_as_colors(labels)

    c1 = center_point(labels == 1)
    c2 = center_point(labels == 2)
    steps = []
    for name, clicks, threshold in [
        ("single-click-default", [c1], DEFAULT_THRESHOLD),
        ("two-clicks-default", [c1, c2], DEFAULT_THRESHOLD),
        ("two-clicks-tight", [c1, c2], 0.6),
        ("two-clicks-max", [c1, c2], 1.0),
        ("single-click-loose", [c1], 1 / 255),
    ]:
        mask = prompt_mask(field, clicks, threshold=threshold)
        steps.append(
            {
                "name": name,
                "clicks": [[int(x), int(y)] for x, y in clicks],
                "threshold": threshold,
                "counts": encode_mask(mask),
                "pixels": np_to_bits(mask),
            }
        )

    payload = {
        "comment": "generated by generate.py; do not edit by hand",
        "scene_seed": spec.seed,
        "width": spec.width,
        "height": spec.height,
        "steps": steps,
    }
    out = Path(__file__).with_name("prompt_fixture.json")
    out.write_text(json.dumps(payload) + "\n")
    print(f"wrote {out} ({len(steps)} steps)")


def np_to_bits(mask) -> list[int]:
    return [int(v) for v in mask.ravel()]


if __name__ == "__main__":
    main()
