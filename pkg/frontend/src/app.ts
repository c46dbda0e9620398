// Application wiring: one session, three coordinated views, and the SSE
// exchange loop. The graph refreshes only when an exchange completes; all
// numbers shown (progress, evidence counts, labels) come from the server.

import { ApiClient } from "./api.js";
import { DialogueView } from "./dialogue.js";
import { GraphView } from "./graph.js";
import { NavigatorView } from "./navigator.js";
import type { GraphEdgePayload, RecommendationItem, StreamEvent } from "./types.js";

export interface AppElements {
  dialogue: HTMLElement;
  graph: HTMLElement;
  navigator: HTMLElement;
  popup: HTMLElement;
}

export class App {
  readonly dialogue: DialogueView;
  readonly graph: GraphView;
  readonly navigator: NavigatorView;
  sessionId = "";
  private busy = false;

  constructor(
    private api: ApiClient,
    private elements: AppElements,
  ) {
    this.dialogue = new DialogueView(elements.dialogue, {
      onSpanHover: (nodeId, active) => this.graph.highlightNode(nodeId, active),
      onSpanClick: (nodeId) => this.graph.highlightNode(nodeId, true),
    });
    this.graph = new GraphView(elements.graph, {
      onNodeHover: (nodeId, active) => this.dialogue.highlightNode(nodeId, active),
      onNodeClick: (nodeId) => this.dialogue.highlightNode(nodeId, true),
      onEdgeLabelClick: (edge) => void this.showEvidence(edge),
    });
    this.navigator = new NavigatorView(elements.navigator, {
      onStepClick: (step) => void this.goToStep(step),
      onSubmit: (text) => void this.submit(text),
      onRecommendationClick: (item) => void this.submit(item.question),
      onDismiss: (item) => void this.dismiss(item),
    });
  }

  async start(existingSessionId?: string): Promise<void> {
    this.sessionId = existingSessionId ?? (await this.api.createSession());
    this.graph.setSession(this.sessionId);
    if (existingSessionId) await this.refresh();
  }

  async submit(text: string): Promise<void> {
    if (this.busy || !text.trim()) return;
    this.busy = true;
    this.dialogue.beginExchange(text);
    let failed = false;
    try {
      await this.api.sendMessage(this.sessionId, text, (event) => this.onEvent(event));
    } catch (error) {
      failed = true;
      this.dialogue.showError(String(error));
    } finally {
      this.busy = false;
    }
    if (!failed) await this.refresh();
  }

  private onEvent(event: StreamEvent): void {
    switch (event.type) {
      case "text":
        this.dialogue.appendText(event.payload.delta);
        break;
      case "entity":
        this.dialogue.addSpan(event.payload);
        break;
      case "triple":
        this.dialogue.bindTriple(event.payload);
        break;
      case "recommendations":
        this.navigator.setRecommendations(event.payload.items);
        break;
      case "progress":
        this.navigator.setProgress(event.payload.value);
        break;
      case "error":
        this.dialogue.showError(`${event.payload.code}: ${event.payload.message}`);
        break;
      case "done":
        this.dialogue.finishExchange(event.payload.step);
        break;
    }
  }

  /** Re-fetch authoritative state after an exchange or dismissal. */
  async refresh(): Promise<void> {
    const snapshot = await this.api.getSession(this.sessionId);
    this.navigator.setSteps(snapshot.steps, snapshot.current_step);
    if (snapshot.steps.length > 0) {
      const graph = await this.api.getGraph(this.sessionId);
      this.graph.setData(graph);
    }
    const recommendations = await this.api.getRecommendations(this.sessionId);
    this.navigator.setRecommendations(recommendations.items);
    this.navigator.setProgress(recommendations.progress);
  }

  async goToStep(step: number): Promise<void> {
    const graph = await this.api.getGraph(this.sessionId, step);
    this.graph.setData(graph);
    this.dialogue.focusStep(step);
    const snapshot = await this.api.getSession(this.sessionId);
    this.navigator.setSteps(snapshot.steps, step);
  }

  async dismiss(item: RecommendationItem): Promise<void> {
    const result = await this.api.dismiss(this.sessionId, item.id);
    this.navigator.setRecommendations(result.items);
    this.navigator.setProgress(result.progress);
  }

  async showEvidence(edge: GraphEdgePayload): Promise<void> {
    const popup = this.elements.popup;
    popup.replaceChildren();
    popup.hidden = false;
    const title = document.createElement("h3");
    title.textContent = `${edge.relation} - ${edge.label} (${edge.evidence_count})`;
    popup.append(title);
    const list = document.createElement("ul");
    list.className = "evidence-list";
    if (edge.direct_edge_ids.length === 0) {
      const note = document.createElement("p");
      note.textContent =
        "No direct literature for this claim; the entities are connected indirectly.";
      popup.append(note);
    }
    for (const edgeId of edge.direct_edge_ids) {
      try {
        const payload = await this.api.getEvidence(edgeId);
        for (const item of payload.evidence) {
          const entry = document.createElement("li");
          entry.textContent = item.year
            ? `${item.source_id}: ${item.title} (${item.year})`
            : `${item.source_id}: ${item.title}`;
          list.append(entry);
        }
      } catch {
        const entry = document.createElement("li");
        entry.textContent = `${edgeId}: literature unavailable`;
        list.append(entry);
      }
    }
    popup.append(list);
    const close = document.createElement("button");
    close.type = "button";
    close.textContent = "Close";
    close.addEventListener("click", () => (popup.hidden = true));
    popup.append(close);
  }
}
