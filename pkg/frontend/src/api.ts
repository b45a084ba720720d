import {
  NextView,
  PendingItem,
  PostBody,
  SessionInfo,
  StudyApiError,
} from "./types.js";

type Fetch = typeof globalThis.fetch;

/**
 * Thin client for the study service. Every call resolves only after the
 * server has acknowledged the transition; the UI never advances
 * optimistically, so the server-side phase machine stays authoritative.
 */
export class StudyApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: Fetch = globalThis.fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const code = body && typeof body.code === "string" ? body.code : "Unknown";
      const detail =
        body && typeof body.detail === "string"
          ? body.detail
          : `request failed with status ${response.status}`;
      throw new StudyApiError(code, response.status, detail);
    }
    return body as T;
  }

  createSession(raterId: string, queueSize?: number, seed?: number): Promise<SessionInfo> {
    return this.request<SessionInfo>("/sessions", {
      method: "POST",
      body: JSON.stringify({ rater_id: raterId, queue_size: queueSize, seed }),
    });
  }

  next(sessionId: string): Promise<NextView> {
    return this.request<NextView>(`/sessions/${encodeURIComponent(sessionId)}/next`);
  }

  /** Submit the hidden-implication trust rating; the response reveals it. */
  submitPre(sessionId: string, headlineId: string, trust: number): Promise<PendingItem> {
    return this.request<PendingItem>(
      `/sessions/${encodeURIComponent(sessionId)}/items/${encodeURIComponent(headlineId)}/pre`,
      { method: "POST", body: JSON.stringify({ trust }) },
    );
  }

  /** Submit the post-reveal judgement; the response is the next view. */
  submitPost(sessionId: string, headlineId: string, body: PostBody): Promise<NextView> {
    return this.request<NextView>(
      `/sessions/${encodeURIComponent(sessionId)}/items/${encodeURIComponent(headlineId)}/post`,
      { method: "POST", body: JSON.stringify(body) },
    );
  }
}
