// Fetch-level mock serving the captured HTTP payloads, so tests exercise
// the real ApiClient and SSE decoding against genuine wire bytes.

import caseStreams from "./fixtures/case3-streams.json";
import caseSession from "./fixtures/case3-session.json";
import caseGraphs from "./fixtures/case3-graphs.json";
import caseRecommendations from "./fixtures/case3-recommendations.json";
import caseProgress from "./fixtures/case3-progress.json";
import afterDismiss from "./fixtures/case3-after-dismiss.json";
import evidenceE005 from "./fixtures/evidence-E005.json";
import ginkgoGraph from "./fixtures/ginkgo-graph.json";
import fishoilStream from "./fixtures/fishoil-stream.json";
import offtopicStream from "./fixtures/offtopic-stream.json";

export const SESSION_ID: string = (caseSession as { id: string }).id;

type MockResponse = {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
  body?: null;
};

function jsonResponse(payload: unknown, status = 200): MockResponse {
  return {
    ok: status < 400,
    status,
    json: async () => payload,
    text: async () => JSON.stringify(payload),
    body: null,
  };
}

function sseResponse(sse: string): MockResponse {
  return {
    ok: true,
    status: 200,
    json: async () => {
      throw new Error("not json");
    },
    text: async () => sse,
    body: null,
  };
}

const streamsByQuestion = new Map<string, string>();
for (const item of caseStreams as { question: string; sse: string }[]) {
  streamsByQuestion.set(item.question, item.sse);
}
streamsByQuestion.set(
  (fishoilStream as { question: string }).question,
  (fishoilStream as { sse: string }).sse,
);
streamsByQuestion.set(
  (offtopicStream as { question: string }).question,
  (offtopicStream as { sse: string }).sse,
);

export interface MockLog {
  requests: { url: string; method: string; body?: string }[];
}

export function makeMockFetch(log: MockLog = { requests: [] }) {
  return async (url: string, init?: RequestInit): Promise<MockResponse> => {
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? init.body : undefined;
    log.requests.push({ url, method, body });
    const [path, query] = url.split("?");

    if (method === "POST" && path === "/sessions") {
      return jsonResponse({ id: SESSION_ID });
    }
    if (method === "POST" && path === `/sessions/${SESSION_ID}/messages`) {
      const { text } = JSON.parse(body ?? "{}");
      const sse = streamsByQuestion.get(text);
      if (!sse) return jsonResponse({ detail: `no captured stream for: ${text}` }, 404);
      return sseResponse(sse);
    }
    if (path === `/sessions/${SESSION_ID}`) {
      return jsonResponse(caseSession);
    }
    if (path === `/sessions/${SESSION_ID}/graph`) {
      const step = new URLSearchParams(query ?? "").get("step");
      const graphs = caseGraphs as Record<string, unknown>;
      if (step === null) return jsonResponse(graphs["2"]);
      return step in graphs
        ? jsonResponse(graphs[step])
        : jsonResponse({ detail: "step out of range" }, 400);
    }
    if (path === `/sessions/${SESSION_ID}/recommendations`) {
      return jsonResponse(caseRecommendations);
    }
    if (
      method === "POST" &&
      path ===
        `/sessions/${SESSION_ID}/recommendations/${(afterDismiss as { dismissed_id: string }).dismissed_id}/dismiss`
    ) {
      const { dismissed_id, ...rest } = afterDismiss as Record<string, unknown>;
      return jsonResponse(rest);
    }
    if (path === `/sessions/${SESSION_ID}/progress`) {
      return jsonResponse(caseProgress);
    }
    if (path === `/edges/E005/evidence`) {
      return jsonResponse(evidenceE005);
    }
    return jsonResponse({ detail: `unmocked route: ${method} ${url}` }, 404);
  };
}

export { caseGraphs, caseRecommendations, caseSession, afterDismiss, ginkgoGraph };
