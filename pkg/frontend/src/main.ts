/**
 * Prompt studio application: pick an image, click prompt points, watch the
 * mask come back from the service.  One prompt request is in flight at a
 * time; newer interactions cancel and supersede it.
 */

import { ApiError, Client, type ImageInfo } from "./api.js";
import { canvasClickToImageCoords } from "./coords.js";
import { drawMarkers, drawMaskOverlay } from "./overlay.js";
import { decodeMask } from "./rle.js";
import {
  DEFAULT_THRESHOLD,
  SessionStore,
  sliderToThreshold,
  thresholdToSlider,
} from "./state.js";

const MAX_DISPLAY = 512;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const client = new Client();
const store = new SessionStore();

const select = el<HTMLSelectElement>("image-select");
const canvas = el<HTMLCanvasElement>("studio-canvas");
const slider = el<HTMLInputElement>("threshold-slider");
const sliderLabel = el<HTMLSpanElement>("threshold-value");
const undoButton = el<HTMLButtonElement>("undo-button");
const redoButton = el<HTMLButtonElement>("redo-button");
const clearButton = el<HTMLButtonElement>("clear-button");
const similarityToggle = el<HTMLInputElement>("similarity-toggle");
const similarityImg = el<HTMLImageElement>("similarity-image");
const errorLine = el<HTMLDivElement>("error-line");
const statusLine = el<HTMLDivElement>("status-line");

let images: ImageInfo[] = [];
let baseImage: HTMLImageElement | null = null;
let scale = 1;
let inflight: AbortController | null = null;
let requestSeq = 0;

function setError(message: string | null): void {
  errorLine.textContent = message ?? "";
  errorLine.style.display = message ? "block" : "none";
}

function setStatus(message: string): void {
  statusLine.textContent = message;
}

function render(): void {
  const ctx = canvas.getContext("2d");
  if (!ctx || !baseImage) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(baseImage, 0, 0, canvas.width, canvas.height);
  const { mask, imageSize, clicks, overlayOpacity } = store.state;
  if (mask && imageSize) {
    drawMaskOverlay(ctx, mask, imageSize.width, imageSize.height, scale, overlayOpacity);
  }
  drawMarkers(ctx, clicks, scale);
  undoButton.disabled = !store.canUndo();
  redoButton.disabled = !store.canRedo();
}

/**
 * Re-query the service for the current click list.  An empty list clears
 * the overlay locally: no request is sent.  Errors surface inline and leave
 * the clicks and the previous mask untouched.
 */
async function refreshMask(): Promise<void> {
  const { imageId, clicks, threshold, imageSize } = store.state;
  inflight?.abort();
  inflight = null;
  if (!imageId || !imageSize) return;
  if (clicks.length === 0) {
    store.setMask(null);
    setStatus("click the image to prompt");
    render();
    return;
  }
  const controller = new AbortController();
  inflight = controller;
  const seq = ++requestSeq;
  setStatus(`prompting with ${clicks.length} point${clicks.length > 1 ? "s" : ""}...`);
  try {
    const resp = await client.prompt(imageId, clicks, threshold, controller.signal);
    if (seq !== requestSeq) return; // superseded while decoding
    store.setMask(decodeMask(resp.mask, imageSize.width, imageSize.height));
    setError(null);
    setStatus(`mask in ${resp.timing_ms.toFixed(1)} ms`);
    render();
  } catch (err) {
    if (controller.signal.aborted) return; // superseded; newer request owns the UI
    if (err instanceof ApiError) {
      setError(err.message);
    } else {
      setError(`request failed: ${String(err)}`);
    }
    setStatus("");
  } finally {
    if (inflight === controller) inflight = null;
  }
}

function updateSimilarity(): void {
  const { imageId } = store.state;
  const show = similarityToggle.checked && imageId !== null;
  similarityImg.style.display = show ? "block" : "none";
  if (show && imageId) {
    similarityImg.src = client.fieldUrl(imageId);
    similarityImg.width = canvas.width;
    similarityImg.height = canvas.height;
  }
}

async function selectImage(id: string): Promise<void> {
  const info = images.find((im) => im.id === id);
  if (!info) return;
  store.selectImage(id, { width: info.width, height: info.height });
  scale = Math.max(1, Math.floor(MAX_DISPLAY / Math.max(info.width, info.height)));
  canvas.width = info.width * scale;
  canvas.height = info.height * scale;
  setError(null);
  setStatus("loading image...");
  const img = new Image();
  img.src = client.imageUrl(id);
  try {
    await img.decode();
  } catch {
    setError(`failed to load image ${id}`);
    return;
  }
  baseImage = img;
  setStatus("click the image to prompt");
  updateSimilarity();
  render();
}

function onCanvasClick(event: MouseEvent): void {
  const { imageSize } = store.state;
  if (!imageSize || !baseImage) return;
  const rect = canvas.getBoundingClientRect();
  const pos = { x: event.clientX - rect.left, y: event.clientY - rect.top };
  if (pos.x < 0 || pos.y < 0 || pos.x >= canvas.width || pos.y >= canvas.height) {
    return; // outside the displayed image area
  }
  store.addClick(canvasClickToImageCoords(pos, scale, imageSize));
  render();
  void refreshMask();
}

function onSlider(): void {
  const threshold = sliderToThreshold(Number(slider.value));
  store.setThreshold(threshold);
  sliderLabel.textContent = threshold.toFixed(4);
  void refreshMask(); // same points, new threshold
}

function onUndo(): void {
  if (store.undo()) {
    render();
    void refreshMask();
  }
}

function onRedo(): void {
  if (store.redo()) {
    render();
    void refreshMask();
  }
}

function onClear(): void {
  if (store.state.clicks.length > 0) {
    store.setClicks([]);
    render();
    void refreshMask();
  }
}

function onKey(event: KeyboardEvent): void {
  if (!(event.ctrlKey || event.metaKey) || event.key.toLowerCase() !== "z") return;
  event.preventDefault();
  if (event.shiftKey) {
    onRedo();
  } else {
    onUndo();
  }
}

async function init(): Promise<void> {
  slider.min = "0";
  slider.max = "1";
  slider.step = "0.001";
  slider.value = String(thresholdToSlider(DEFAULT_THRESHOLD));
  sliderLabel.textContent = DEFAULT_THRESHOLD.toFixed(4);

  canvas.addEventListener("click", onCanvasClick);
  slider.addEventListener("input", onSlider);
  undoButton.addEventListener("click", onUndo);
  redoButton.addEventListener("click", onRedo);
  clearButton.addEventListener("click", onClear);
  similarityToggle.addEventListener("change", updateSimilarity);
  document.addEventListener("keydown", onKey);
  select.addEventListener("change", () => void selectImage(select.value));

  try {
    images = await client.listImages();
  } catch (err) {
    setError(`cannot reach the service: ${String(err)}`);
    return;
  }
  if (images.length === 0) {
    setError("service has no images");
    return;
  }
  for (const info of images) {
    const option = document.createElement("option");
    option.value = info.id;
    option.textContent = `${info.id} (${info.width}x${info.height})`;
    select.appendChild(option);
  }
  await selectImage(images[0]!.id);
}

void init();
