// Preview client: debounced, single in-flight request, stale-drop. The UI
// never computes flow itself; everything displayed comes from the service.

import type { FlowPreviewResponse, PreviewRequest, WarpPreviewResponse } from "./types.js";

export const DEBOUNCE_MS = 300;

export interface FetchLike {
  (input: string, init?: RequestInit): Promise<Response>;
}

export class ServiceError extends Error {
  readonly status: number;
  readonly fieldPath: string | null;

  constructor(status: number, message: string, fieldPath: string | null = null) {
    super(message);
    this.status = status;
    this.fieldPath = fieldPath;
  }
}

async function throwServiceError(res: Response): Promise<never> {
  let message = `service error ${res.status}`;
  let path: string | null = null;
  try {
    const body = await res.json();
    if (Array.isArray(body.detail) && body.detail.length > 0) {
      path = body.detail[0].path ?? null;
      message = body.detail
        .map((d: { path?: string; message?: string }) => `${d.path ?? "?"}: ${d.message ?? ""}`)
        .join("; ");
    } else if (typeof body.detail === "string") {
      message = body.detail;
    }
  } catch {
    // body was not JSON; keep the generic message
  }
  throw new ServiceError(res.status, message, path);
}

export class PreviewClient {
  readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;
  private readonly debounceMs: number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private controller: AbortController | null = null;
  private requestSeq = 0;
  private supersede: (() => void) | null = null;

  constructor(baseUrl: string, fetchImpl: FetchLike = fetch, debounceMs = DEBOUNCE_MS) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
    this.debounceMs = debounceMs;
  }

  async health(): Promise<boolean> {
    try {
      const res = await this.fetchImpl(`${this.baseUrl}/health`);
      return res.ok;
    } catch {
      return false;
    }
  }

  private async post<T>(path: string, req: PreviewRequest, signal?: AbortSignal): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
      signal,
    });
    if (!res.ok) await throwServiceError(res);
    return (await res.json()) as T;
  }

  /** One-shot flow preview, no debounce (used by tests and exports). */
  previewFlow(req: PreviewRequest): Promise<FlowPreviewResponse> {
    return this.post<FlowPreviewResponse>("/preview/flow", req);
  }

  previewWarp(req: PreviewRequest): Promise<WarpPreviewResponse> {
    return this.post<WarpPreviewResponse>("/preview/warp", req);
  }

  /**
   * Debounced preview: waits for the edit burst to settle, aborts any older
   * in-flight request, and resolves null for responses that were superseded
   * while in flight (the caller simply skips rendering those).
   */
  schedulePreview(req: PreviewRequest): Promise<FlowPreviewResponse | null> {
    if (this.timer !== null) clearTimeout(this.timer);
    this.supersede?.(); // release any caller still waiting on the old edit
    const seq = ++this.requestSeq;
    return new Promise((resolve, reject) => {
      this.supersede = () => resolve(null);
      this.timer = setTimeout(async () => {
        this.timer = null;
        this.supersede = null;
        this.controller?.abort();
        this.controller = new AbortController();
        try {
          const out = await this.post<FlowPreviewResponse>(
            "/preview/flow",
            req,
            this.controller.signal,
          );
          resolve(seq === this.requestSeq ? out : null);
        } catch (err) {
          if ((err as Error).name === "AbortError") {
            resolve(null);
          } else {
            reject(err);
          }
        }
      }, this.debounceMs);
    });
  }
}
