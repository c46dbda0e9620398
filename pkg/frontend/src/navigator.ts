// Navigator: the step dots for revisiting earlier queries, the circular
// progress ring (always showing the server's ratio, never a local
// computation), the top-three recommendation buttons with dismissal
// crosses, a hoverable "More" list for the rest, and the free-text input.

import type { RecommendationItem, SessionStepPayload } from "./types.js";

export interface NavigatorCallbacks {
  onStepClick?: (step: number) => void;
  onSubmit?: (text: string) => void;
  onRecommendationClick?: (item: RecommendationItem) => void;
  onDismiss?: (item: RecommendationItem) => void;
}

const RING_RADIUS = 16;
const RING_CIRCUMFERENCE = 2 * Math.PI * RING_RADIUS;
const MORE_LIST_CAP = 10;

export class NavigatorView {
  private stepper: HTMLElement;
  private ring: SVGCircleElement;
  private ringText: HTMLElement;
  private recBar: HTMLElement;
  private moreList: HTMLElement;
  private input: HTMLInputElement;

  constructor(
    private container: HTMLElement,
    private callbacks: NavigatorCallbacks = {},
  ) {
    this.container.classList.add("navigator");

    const topRow = document.createElement("div");
    topRow.className = "nav-top";
    this.stepper = document.createElement("div");
    this.stepper.className = "stepper";
    topRow.append(this.stepper, this.buildRing());
    this.ringText = topRow.querySelector(".ring-text") as HTMLElement;
    this.ring = topRow.querySelector(".ring-arc") as unknown as SVGCircleElement;

    this.recBar = document.createElement("div");
    this.recBar.className = "recommendations";
    this.moreList = document.createElement("div");
    this.moreList.className = "more-list";
    this.moreList.hidden = true;

    const inputRow = document.createElement("form");
    inputRow.className = "input-row";
    this.input = document.createElement("input");
    this.input.type = "text";
    this.input.placeholder = "Ask a question...";
    const send = document.createElement("button");
    send.type = "submit";
    send.textContent = "Send";
    inputRow.append(this.input, send);
    inputRow.addEventListener("submit", (event) => {
      event.preventDefault();
      const text = this.input.value.trim();
      if (!text) return;
      this.input.value = "";
      this.callbacks.onSubmit?.(text);
    });

    this.container.append(topRow, this.recBar, this.moreList, inputRow);
  }

  private buildRing(): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "progress-ring";
    wrap.innerHTML =
      `<svg viewBox="0 0 40 40" class="ring-svg">` +
      `<circle class="ring-bg" cx="20" cy="20" r="${RING_RADIUS}"></circle>` +
      `<circle class="ring-arc" cx="20" cy="20" r="${RING_RADIUS}" ` +
      `stroke-dasharray="0 ${RING_CIRCUMFERENCE.toFixed(2)}"></circle>` +
      `</svg><span class="ring-text">-</span>`;
    return wrap;
  }

  setSteps(steps: SessionStepPayload[], currentStep: number): void {
    this.stepper.replaceChildren();
    for (const step of steps) {
      const dot = document.createElement("button");
      dot.type = "button";
      dot.className = "step-dot";
      dot.title = step.query_text; // hover reveals the query
      dot.dataset.step = String(step.index);
      dot.classList.toggle("current", step.index === currentStep);
      dot.addEventListener("click", () => this.callbacks.onStepClick?.(step.index));
      this.stepper.append(dot);
    }
  }

  /** Display the server-computed ratio; null means no pool yet. */
  setProgress(value: number | null): void {
    if (value === null) {
      this.ringText.textContent = "-";
      this.ring.setAttribute("stroke-dasharray", `0 ${RING_CIRCUMFERENCE.toFixed(2)}`);
      return;
    }
    const clamped = Math.max(0, Math.min(1, value));
    const arc = clamped * RING_CIRCUMFERENCE;
    this.ring.setAttribute(
      "stroke-dasharray",
      `${arc.toFixed(2)} ${(RING_CIRCUMFERENCE - arc).toFixed(2)}`,
    );
    this.ringText.textContent = `${Math.round(clamped * 100)}%`;
    this.ringText.dataset.value = String(value);
  }

  setRecommendations(items: RecommendationItem[]): void {
    this.recBar.replaceChildren();
    this.moreList.replaceChildren();
    const top = items.slice(0, 3);
    const rest = items.slice(3, 3 + MORE_LIST_CAP);
    for (const item of top) {
      const button = document.createElement("span");
      button.className = "rec-button";
      button.dataset.recId = item.id;
      const ask = document.createElement("button");
      ask.type = "button";
      ask.className = "rec-ask";
      ask.textContent = item.question;
      ask.addEventListener("click", () => this.callbacks.onRecommendationClick?.(item));
      const cross = document.createElement("button");
      cross.type = "button";
      cross.className = "rec-dismiss";
      cross.setAttribute("aria-label", `dismiss: ${item.question}`);
      cross.textContent = "×";
      cross.addEventListener("click", () => this.callbacks.onDismiss?.(item));
      button.append(ask, cross);
      this.recBar.append(button);
    }
    if (rest.length > 0) {
      const more = document.createElement("button");
      more.type = "button";
      more.className = "more-button";
      more.textContent = `More (${rest.length})`;
      more.addEventListener("mouseenter", () => (this.moreList.hidden = false));
      more.addEventListener("click", () => (this.moreList.hidden = !this.moreList.hidden));
      this.recBar.append(more);
      for (const item of rest) {
        const entry = document.createElement("button");
        entry.type = "button";
        entry.className = "more-item";
        entry.textContent = item.question;
        entry.addEventListener("click", () => this.callbacks.onRecommendationClick?.(item));
        this.moreList.append(entry);
      }
    } else {
      this.moreList.hidden = true;
    }
  }
}
