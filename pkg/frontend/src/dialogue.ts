// Text dialogue view: user/assistant exchanges with streaming text,
// highlighted entity spans, underlined relation spans, and hover/click
// synchronization with the graph view (keyed by matched node id).

import type { SpanPayload, TriplePayload } from "./types.js";

interface Exchange {
  element: HTMLElement;
  answer: HTMLElement;
  plainText: string;
  spans: SpanPayload[];
  markerNodes: Map<string, string>; // marker id -> matched KG node id
  step: number | null;
}

export interface DialogueCallbacks {
  onSpanHover?: (nodeId: string, active: boolean) => void;
  onSpanClick?: (nodeId: string) => void;
}

export class DialogueView {
  private exchanges: Exchange[] = [];
  private current: Exchange | null = null;

  constructor(
    private container: HTMLElement,
    private callbacks: DialogueCallbacks = {},
  ) {}

  beginExchange(question: string): void {
    const element = document.createElement("div");
    element.className = "exchange";
    const bubble = document.createElement("div");
    bubble.className = "question";
    bubble.textContent = question;
    const answer = document.createElement("div");
    answer.className = "answer";
    element.append(bubble, answer);
    this.container.append(element);
    this.current = {
      element,
      answer,
      plainText: "",
      spans: [],
      markerNodes: new Map(),
      step: null,
    };
    this.exchanges.push(this.current);
    this.scrollToEnd();
  }

  appendText(delta: string): void {
    if (!this.current) return;
    this.current.plainText += delta;
    this.render(this.current);
  }

  addSpan(span: SpanPayload): void {
    if (!this.current) return;
    this.current.spans.push(span);
    this.render(this.current);
  }

  /** Bind marker ids to matched KG nodes once grounding results arrive. */
  bindTriple(payload: TriplePayload): void {
    const exchange = this.current ?? this.exchanges[this.exchanges.length - 1];
    if (!exchange) return;
    const bind = (namespacedId: string, nodeId: string | null) => {
      if (!nodeId) return;
      const marker = namespacedId.includes(":")
        ? namespacedId.slice(namespacedId.indexOf(":") + 1)
        : namespacedId;
      exchange.markerNodes.set(marker, nodeId);
    };
    bind(payload.triple.subject_id, payload.subject_match.node);
    bind(payload.triple.object_id, payload.object_match.node);
    this.render(exchange);
  }

  finishExchange(step: number): void {
    if (!this.current) return;
    this.current.step = step;
    this.current.element.dataset.step = String(step);
    this.current = null;
  }

  showError(message: string): void {
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = message;
    (this.current?.element ?? this.container).append(banner);
    this.current = null;
  }

  /** Bring one step's exchange into view and mark it focused. */
  focusStep(step: number): void {
    for (const exchange of this.exchanges) {
      exchange.element.classList.toggle("focused", exchange.step === step);
    }
  }

  /** Graph-side hover/click lands here: light up every mention of a node. */
  highlightNode(nodeId: string, active: boolean): void {
    for (const mark of this.container.querySelectorAll<HTMLElement>("[data-node-id]")) {
      if (mark.dataset.nodeId === nodeId) {
        mark.classList.toggle("sync-highlight", active);
      }
    }
  }

  private render(exchange: Exchange): void {
    const ordered = [...exchange.spans].sort((a, b) => a.start - b.start);
    exchange.answer.replaceChildren();
    let cursor = 0;
    for (const span of ordered) {
      if (span.start > cursor) {
        exchange.answer.append(
          document.createTextNode(exchange.plainText.slice(cursor, span.start)),
        );
      }
      const mark = document.createElement("span");
      mark.className = span.kind === "entity" ? "entity" : "relation";
      mark.textContent = exchange.plainText.slice(span.start, span.end);
      mark.dataset.markerId = span.marker_id;
      const nodeId = exchange.markerNodes.get(span.marker_id);
      if (nodeId) {
        mark.dataset.nodeId = nodeId;
        mark.addEventListener("mouseenter", () => this.callbacks.onSpanHover?.(nodeId, true));
        mark.addEventListener("mouseleave", () => this.callbacks.onSpanHover?.(nodeId, false));
        mark.addEventListener("click", () => this.callbacks.onSpanClick?.(nodeId));
      }
      exchange.answer.append(mark);
      cursor = span.end;
    }
    if (cursor < exchange.plainText.length) {
      exchange.answer.append(document.createTextNode(exchange.plainText.slice(cursor)));
    }
    this.scrollToEnd();
  }

  private scrollToEnd(): void {
    this.container.scrollTop = this.container.scrollHeight;
  }
}
