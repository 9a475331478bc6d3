/** Engine client: JSON POSTs with latest-wins cancellation. */

import { parseWithRaw, type RawDocument } from "./rawjson.js";
import type { ErrorDocument } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly doc: ErrorDocument,
  ) {
    super(doc.message);
  }
}

export interface ApiResponse<T> {
  doc: T;
  /** Exact response body; the only source for displayed numbers. */
  text: string;
  raw: RawDocument["raw"];
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  /** POST a command payload; any still-running request is aborted first. */
  async post<T>(command: string, payload: unknown): Promise<ApiResponse<T>> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const resp = await this.fetchImpl(`${this.base}/api/${command}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
      signal: controller.signal,
    });
    const text = await resp.text();
    if (this.inflight === controller) this.inflight = null;
    const parsed = parseWithRaw(text);
    if (!resp.ok) {
      throw new ApiError(resp.status, parsed.value as ErrorDocument);
    }
    return { doc: parsed.value as T, text, raw: parsed.raw };
  }

  async health(): Promise<{ status: string; version: string }> {
    const resp = await this.fetchImpl(`${this.base}/api/health`);
    return (await resp.json()) as { status: string; version: string };
  }
}
