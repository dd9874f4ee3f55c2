"""HTTP service for interactive prompting over precomputed color fields.

All state (images, fields, label maps) is loaded once at startup and never
mutated, so concurrent requests share it freely.  Prompting is CPU-bound and
runs on a bounded worker pool.
"""

from __future__ import annotations

import asyncio
import io
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from PIL import Image
from pydantic import BaseModel, Field

from .dataio import load_labels, load_manifest, resolve_field
from .metrics import mask_iou
from .prompting import DEFAULT_THRESHOLD, prompt_mask
from .rle import encode_mask

logger = logging.getLogger(__name__)


class PromptPoint(BaseModel):
    x: int
    y: int


class PromptRequest(BaseModel):
    image_id: str
    points: list[PromptPoint] = Field(min_length=1)
    threshold: float | None = None
    gt_instance_id: int | None = None


class PromptResponse(BaseModel):
    mask: list[int]
    iou_vs_gt: float | None = None
    timing_ms: float


@dataclass
class _ImageRecord:
    image_id: str
    width: int
    height: int
    png_bytes: bytes
    field_png_bytes: bytes
    field: np.ndarray
    labels: np.ndarray


def _png_bytes(field: np.ndarray) -> bytes:
    quant = np.rint(np.clip(field, 0.0, 255.0)).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(quant, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def load_records(manifest_path, fields_dir=None) -> dict[str, _ImageRecord]:
    manifest = load_manifest(manifest_path)
    records: dict[str, _ImageRecord] = {}
    for entry in manifest:
        labels, _ = load_labels(entry.labels_path)
        field = resolve_field(entry, fields_dir, labels)
        h, w = field.shape[:2]
        if labels.shape != (h, w):
            raise ValueError(
                f"{entry.id}: field {field.shape[:2]} and labels {labels.shape} disagree"
            )
        records[entry.id] = _ImageRecord(
            image_id=entry.id,
            width=w,
            height=h,
            png_bytes=Path(entry.image_path).read_bytes(),
            field_png_bytes=_png_bytes(field),
            field=field,
            labels=labels,
        )
    logger.info("loaded %d images", len(records))
    return records


def create_app(manifest_path, fields_dir=None, threads: int = 4) -> FastAPI:
    records = load_records(manifest_path, fields_dir)

    @asynccontextmanager
    async def _lifespan(app: FastAPI):
        app.state.executor = ThreadPoolExecutor(max_workers=threads)
        try:
            yield
        finally:
            app.state.executor.shutdown(wait=False)

    app = FastAPI(title="iclseg prompt service", lifespan=_lifespan)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.records = records

    @app.exception_handler(Exception)
    async def _unhandled(request, exc):
        logger.exception("request failed: %s", exc)
        return JSONResponse(status_code=500, content={"detail": "internal error"})

    def _record(image_id: str) -> _ImageRecord:
        rec = records.get(image_id)
        if rec is None:
            raise HTTPException(status_code=404, detail=f"unknown image id {image_id!r}")
        return rec

    @app.get("/api/health")
    async def health():
        return {"status": "ok"}

    @app.get("/api/images")
    async def list_images():
        return [
            {"id": rec.image_id, "width": rec.width, "height": rec.height}
            for rec in records.values()
        ]

    @app.get("/api/images/{image_id}")
    async def get_image(image_id: str):
        return Response(content=_record(image_id).png_bytes, media_type="image/png")

    @app.get("/api/images/{image_id}/field")
    async def get_field(image_id: str):
        return Response(content=_record(image_id).field_png_bytes, media_type="image/png")

    @app.post("/api/prompt", response_model=PromptResponse, response_model_exclude_none=True)
    async def prompt(req: PromptRequest):
        rec = _record(req.image_id)
        points = [(p.x, p.y) for p in req.points]
        for x, y in points:
            if not (0 <= x < rec.width and 0 <= y < rec.height):
                raise HTTPException(
                    status_code=422,
                    detail=f"point ({x}, {y}) out of bounds for {rec.width}x{rec.height}",
                )
        threshold = DEFAULT_THRESHOLD if req.threshold is None else req.threshold
        if not np.isfinite(threshold):
            raise HTTPException(status_code=422, detail="threshold must be finite")
        iou = None
        if req.gt_instance_id is not None and not np.any(rec.labels == req.gt_instance_id):
            raise HTTPException(
                status_code=422,
                detail=f"instance id {req.gt_instance_id} not present in {req.image_id}",
            )
        start = time.perf_counter()
        loop = asyncio.get_running_loop()
        mask = await loop.run_in_executor(
            app.state.executor, lambda: prompt_mask(rec.field, points, threshold=threshold)
        )
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        if req.gt_instance_id is not None:
            iou = mask_iou(mask, rec.labels == req.gt_instance_id)
        return PromptResponse(mask=encode_mask(mask), iou_vs_gt=iou, timing_ms=elapsed_ms)

    return app
