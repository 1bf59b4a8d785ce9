/** Thin fetch wrapper around the session service API. */
import type { ApiErrorBody, CheckpointInfo, SessionSnapshot } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    if (response.status === 204) return undefined as T;
    const body = await response.json();
    if (!response.ok) {
      const err = body as ApiErrorBody;
      throw new ApiError(response.status, err.error ?? "Unknown",
        err.message ?? response.statusText);
    }
    return body as T;
  }

  async listCheckpoints(): Promise<CheckpointInfo[]> {
    const doc = await this.request<{ checkpoints: CheckpointInfo[] }>(
      "/v1/checkpoints");
    return doc.checkpoints;
  }

  createSession(checkpoint: string, stop: string): Promise<SessionSnapshot> {
    return this.request("/v1/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ checkpoint, stop }),
    });
  }

  answer(sessionId: string, queryId: number,
         value: number): Promise<SessionSnapshot> {
    return this.request(`/v1/sessions/${sessionId}/answers`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ query_id: queryId, value }),
    });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request(`/v1/sessions/${sessionId}`);
  }

  deleteSession(sessionId: string): Promise<void> {
    return this.request(`/v1/sessions/${sessionId}`, { method: "DELETE" });
  }
}
