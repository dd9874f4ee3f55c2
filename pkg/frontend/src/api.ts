/** Typed client for the prompting service HTTP API. */

import type { PromptPoint } from "./coords.js";

export interface ImageInfo {
  id: string;
  width: number;
  height: number;
}

export interface PromptResponse {
  /** Run-length counts, row-major, zeros first. */
  mask: number[];
  iou_vs_gt?: number;
  timing_ms: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function errorDetail(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    if (body.detail !== undefined) return JSON.stringify(body.detail);
  } catch {
    /* non-JSON error body */
  }
  return resp.statusText || "request failed";
}

export class Client {
  constructor(private readonly base: string = "") {}

  imageUrl(id: string): string {
    return `${this.base}/api/images/${encodeURIComponent(id)}`;
  }

  fieldUrl(id: string): string {
    return `${this.base}/api/images/${encodeURIComponent(id)}/field`;
  }

  async listImages(): Promise<ImageInfo[]> {
    const resp = await fetch(`${this.base}/api/images`);
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    return (await resp.json()) as ImageInfo[];
  }

  async prompt(
    imageId: string,
    points: PromptPoint[],
    threshold: number,
    signal?: AbortSignal,
  ): Promise<PromptResponse> {
    const resp = await fetch(`${this.base}/api/prompt`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ image_id: imageId, points, threshold }),
      signal,
    });
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    return (await resp.json()) as PromptResponse;
  }
}
