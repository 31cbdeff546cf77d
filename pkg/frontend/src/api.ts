/**
 * Thin client for the prediction service.
 *
 * What-if requests are latest-wins: firing a new one aborts any request still
 * in flight, so a fast slider drag can never paint a stale response over a
 * newer one.
 */

import { WhatIfResponse } from "./state.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`API error ${status}: ${detail}`);
  }
}

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (u, i) => fetch(u, i)
  ) {}

  async health(): Promise<{ status: string; robots: number }> {
    return this.getJson("/healthz");
  }

  async posterior(robotId: string): Promise<unknown> {
    return this.getJson(`/robots/${encodeURIComponent(robotId)}/posterior`);
  }

  /**
   * POST a scenario set; resolves to null when superseded by a newer call.
   */
  async whatIf(robotId: string, scenarios: number[][]): Promise<WhatIfResponse | null> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const resp = await this.fetchImpl(
        `${this.baseUrl}/robots/${encodeURIComponent(robotId)}/whatif`,
        {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify({ scenarios }),
          signal: controller.signal,
        }
      );
      if (!resp.ok) throw new ApiError(resp.status, await resp.text());
      return (await resp.json()) as WhatIfResponse;
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") return null;
      if (err instanceof Error && err.name === "AbortError") return null;
      throw err;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path);
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as T;
  }
}
