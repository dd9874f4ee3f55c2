"""File formats: field PNGs with a lossless sidecar, 16-bit label maps,
polygon rasterization, and dataset manifests.

The sidecar format is a 16-byte header -- magic ``ICF1``, little-endian u32
width, u32 height, u32 reserved (zero) -- followed by the field as row-major
little-endian float64, so a save/load round trip is bit-identical.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .field import encode_labels_as_colors, validate_field, validate_labels

MAGIC = b"ICF1"
HEADER = struct.Struct("<4sIII")
SIDECAR_SUFFIX = ".icf"
MAX_LABEL = 65535


def ensure_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(SIDECAR_SUFFIX)


def save_field(field: np.ndarray, path, exact: bool = False) -> Path:
    """Write a field as an 8-bit PNG (values rounded half-to-even on [0, 255]).

    A ``.icf`` path writes only the lossless sidecar; ``exact=True`` on a PNG
    path writes the sidecar alongside so the full precision survives.
    """
    field = validate_field(field)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == SIDECAR_SUFFIX:
        _write_sidecar(field, path)
        return path
    quant = np.rint(np.clip(field, 0.0, 255.0)).astype(np.uint8)
    Image.fromarray(quant, mode="RGB").save(path)
    if exact:
        _write_sidecar(field, _sidecar_path(path))
    return path


def _write_sidecar(field: np.ndarray, path: Path) -> None:
    h, w = field.shape[:2]
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, w, h, 0))
        fh.write(np.ascontiguousarray(field, dtype="<f8").tobytes())


def load_field(path, prefer_exact: bool = True) -> np.ndarray:
    """Load a field; a sidecar next to a PNG is preferred when present."""
    path = Path(path)
    if path.suffix == SIDECAR_SUFFIX:
        return _read_sidecar(path)
    sidecar = _sidecar_path(path)
    if prefer_exact and sidecar.exists():
        return _read_sidecar(sidecar)
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float64)


def _read_sidecar(path: Path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if len(blob) < HEADER.size or blob[:4] != MAGIC:
        raise ValueError(f"{path}: not a field sidecar (bad magic)")
    _, w, h, _reserved = HEADER.unpack_from(blob)
    expected = HEADER.size + w * h * 3 * 8
    if len(blob) != expected:
        raise ValueError(
            f"{path}: truncated or padded field sidecar: expected {expected} bytes "
            f"for {w}x{h}, file ends at byte {len(blob)}"
        )
    data = np.frombuffer(blob, dtype="<f8", offset=HEADER.size)
    return data.reshape(h, w, 3).astype(np.float64)


def save_labels(labels: np.ndarray, path) -> Path:
    """Write a label map as a single-channel 16-bit PNG."""
    n = validate_labels(labels)
    if n > MAX_LABEL:
        raise ValueError(f"label map has {n} instances; 16-bit PNG caps at {MAX_LABEL}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(labels, dtype=np.uint16)).save(path)
    return path


def load_labels(path) -> tuple[np.ndarray, dict[int, int]]:
    """Load a label map, compacting ids to {1..n}.

    8-bit inputs are widened; the returned dict records every non-identity id
    remap (e.g. ``{2: 1, 5: 2}`` for a map holding ids {0, 2, 5}).
    """
    with Image.open(path) as img:
        if img.mode in ("I;16", "I", "L", "P"):
            arr = np.asarray(img, dtype=np.int64)
        else:
            raise ValueError(f"{path}: label PNG must be single-channel, got mode {img.mode}")
    if arr.ndim != 2:
        raise ValueError(f"{path}: label PNG must be single-channel")
    return compact_labels(arr)


def compact_labels(arr: np.ndarray) -> tuple[np.ndarray, dict[int, int]]:
    """Remap arbitrary non-negative ids onto {0..n} preserving order."""
    arr = np.asarray(arr)
    if arr.min() < 0:
        raise ValueError("label ids must be non-negative")
    ids = np.unique(arr)
    instance_ids = ids[ids > 0]
    lut = np.zeros(int(arr.max()) + 1, dtype=np.int32)
    remap: dict[int, int] = {}
    for new, old in enumerate(instance_ids, start=1):
        lut[old] = new
        if int(old) != new:
            remap[int(old)] = new
    return lut[arr], remap


def rasterize_polygons(polygons, width: int, height: int) -> np.ndarray:
    """Fill polygons onto a label map by the even-odd rule at pixel centers.

    ``polygons`` is a sequence of ``(instance_id, vertices)`` with vertices as
    (x, y) pairs.  Pixel (row y, col x) samples at (x+0.5, y+0.5) and is filled
    only when strictly inside.  Later polygons overwrite earlier ones; ids are
    compacted at the end.
    """
    canvas = np.zeros((height, width), dtype=np.int64)
    for instance_id, vertices in polygons:
        if instance_id < 1:
            raise ValueError(f"polygon instance id must be >= 1, got {instance_id}")
        pts = [(float(x), float(y)) for x, y in vertices]
        if len({(round(x, 9), round(y, 9)) for x, y in pts}) < 3:
            raise ValueError("polygon needs at least 3 distinct vertices")
        edges = [(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]
        for row in range(height):
            cy = row + 0.5
            crossings = []
            for (x1, y1), (x2, y2) in edges:
                if y1 == y2:
                    continue
                lo, hi = (y1, y2) if y1 < y2 else (y2, y1)
                if lo <= cy < hi:  # half-open: shared vertices count once
                    crossings.append(x1 + (cy - y1) * (x2 - x1) / (y2 - y1))
            crossings.sort()
            for k in range(0, len(crossings) - 1, 2):
                left, right = crossings[k], crossings[k + 1]
                start = max(0, int(np.floor(left - 0.5)))
                stop = min(width, int(np.ceil(right + 0.5)))
                for col in range(start, stop):
                    if left < col + 0.5 < right:
                        canvas[row, col] = instance_id
    labels, _ = compact_labels(canvas)
    return labels


@dataclass
class ManifestEntry:
    id: str
    image_path: str
    labels_path: str
    field_path: str | None = None


def save_manifest(entries, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"version": 1, "entries": []}
    for e in entries:
        item = {"id": e.id, "image_path": e.image_path, "labels_path": e.labels_path}
        if e.field_path is not None:
            item["field_path"] = e.field_path
        payload["entries"].append(item)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def load_manifest(path) -> list[ManifestEntry]:
    """Parse a manifest and check every referenced file exists.

    Relative paths resolve against the manifest's directory; returned entries
    carry the resolved absolute paths.
    """
    path = Path(path)
    payload = json.loads(path.read_text())
    if payload.get("version") != 1:
        raise ValueError(f"{path}: unsupported manifest version {payload.get('version')!r}")
    base = path.parent
    entries = []
    for item in payload["entries"]:
        entry = ManifestEntry(
            id=str(item["id"]),
            image_path=str(base / item["image_path"]),
            labels_path=str(base / item["labels_path"]),
            field_path=str(base / item["field_path"]) if item.get("field_path") else None,
        )
        for p in (entry.image_path, entry.labels_path, entry.field_path):
            if p is not None and not Path(p).exists():
                raise FileNotFoundError(f"{path}: manifest references missing file {p}")
        entries.append(entry)
    return entries


def resolve_field(entry: ManifestEntry, fields_dir=None, labels: np.ndarray | None = None):
    """Locate the color field for a manifest entry.

    Preference order: the entry's own field_path, then <fields_dir>/<id> with a
    lossless sidecar before PNG, then an ideal coloring derived from labels.
    """
    if entry.field_path is not None:
        return load_field(entry.field_path)
    if fields_dir is not None:
        for suffix in (SIDECAR_SUFFIX, ".png"):
            candidate = Path(fields_dir) / f"{entry.id}{suffix}"
            if candidate.exists():
                return load_field(candidate)
    if labels is None:
        labels, _ = load_labels(entry.labels_path)
    return encode_labels_as_colors(labels)
