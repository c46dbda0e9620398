// HTTP client for the kgchat service. The UI owns no authoritative state:
// everything it displays comes from these calls.

import { SseDecoder } from "./sse.js";
import type {
  EvidencePayload,
  GraphPayload,
  RecommendationsPayload,
  SessionSnapshot,
  StreamEvent,
} from "./types.js";

type FetchLike = (url: string, init?: RequestInit) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
  body?: ReadableStream<Uint8Array> | null;
}>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) throw new ApiError(response.status, `GET ${path} failed`);
    return (await response.json()) as T;
  }

  async createSession(): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions`, { method: "POST" });
    if (!response.ok) throw new ApiError(response.status, "cannot create session");
    const payload = (await response.json()) as { id: string };
    return payload.id;
  }

  /**
   * Send one message; events are delivered to `onEvent` as they arrive
   * (incrementally when the response body is streamable, otherwise after
   * the full body is read).
   */
  async sendMessage(
    sessionId: string,
    text: string,
    onEvent: (event: StreamEvent) => void,
  ): Promise<void> {
    const response = await this.fetchFn(
      `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/messages`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ text }),
      },
    );
    if (!response.ok) throw new ApiError(response.status, "message rejected");
    const decoder = new SseDecoder();
    if (response.body && typeof response.body.getReader === "function") {
      const reader = response.body.getReader();
      const textDecoder = new TextDecoder();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const event of decoder.push(textDecoder.decode(value, { stream: true }))) {
          onEvent(event);
        }
      }
    } else {
      for (const event of decoder.push(await response.text())) onEvent(event);
    }
    for (const event of decoder.end()) onEvent(event);
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.getJson(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  getGraph(sessionId: string, step?: number): Promise<GraphPayload> {
    const suffix = step === undefined ? "" : `?step=${step}`;
    return this.getJson(`/sessions/${encodeURIComponent(sessionId)}/graph${suffix}`);
  }

  getRecommendations(sessionId: string, k = 13): Promise<RecommendationsPayload> {
    return this.getJson(`/sessions/${encodeURIComponent(sessionId)}/recommendations?k=${k}`);
  }

  async dismiss(sessionId: string, recId: string): Promise<RecommendationsPayload> {
    const response = await this.fetchFn(
      `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/recommendations/` +
        `${encodeURIComponent(recId)}/dismiss`,
      { method: "POST" },
    );
    if (!response.ok) throw new ApiError(response.status, "dismiss failed");
    return (await response.json()) as RecommendationsPayload;
  }

  getProgress(sessionId: string): Promise<{ value: number | null }> {
    return this.getJson(`/sessions/${encodeURIComponent(sessionId)}/progress`);
  }

  getEvidence(edgeId: string): Promise<EvidencePayload> {
    return this.getJson(`/edges/${encodeURIComponent(edgeId)}/evidence`);
  }
}
