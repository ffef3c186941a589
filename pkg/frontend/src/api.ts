/** Typed client for the labeling service's /v1 endpoints. */

import type {
  Label,
  LabelReceipt,
  QueueItem,
  SessionDetail,
  SessionSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

type Fetch = (input: string, init?: RequestInit) => Promise<Response>;

export class Client {
  private doFetch: Fetch;

  constructor(
    private base = "",
    doFetch?: Fetch,
  ) {
    this.doFetch = doFetch ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.doFetch(this.base + path, init);
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`.trim();
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") {
          detail = body.detail;
        }
      } catch {
        // Non-JSON error body; keep the status line.
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  sessions(): Promise<SessionSummary[]> {
    return this.request("/v1/sessions").then(r => r.json());
  }

  session(id: string): Promise<SessionDetail> {
    return this.request(`/v1/sessions/${id}`).then(r => r.json());
  }

  advance(id: string): Promise<void> {
    return this.request(`/v1/sessions/${id}/advance`, { method: "POST" }).then(() => {});
  }

  queue(id: string): Promise<QueueItem[]> {
    return this.request(`/v1/sessions/${id}/queue`).then(r => r.json());
  }

  /** Post a single decision; the service answers 409 for pairs it is
   * not currently asking about. */
  submit(id: string, label: Label): Promise<LabelReceipt> {
    return this.request(`/v1/sessions/${id}/labels`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify([label]),
    }).then(r => r.json());
  }
}
