import { beforeEach, describe, expect, it } from "vitest";

import { NavigatorView } from "../src/navigator.js";
import type { RecommendationItem, SessionStepPayload } from "../src/types.js";
import caseRecommendations from "./fixtures/case3-recommendations.json";
import caseSession from "./fixtures/case3-session.json";

const recs = (caseRecommendations as { items: RecommendationItem[] }).items;
const steps = (caseSession as { steps: SessionStepPayload[] }).steps;

function makeItems(count: number): RecommendationItem[] {
  return Array.from({ length: count }, (_, i) => ({
    id: `rec-${i}`,
    source: "C0002",
    target: { kind: "type", value: "Drugs" },
    question: `Question number ${i}?`,
    score: count - i,
  }));
}

describe("NavigatorView", () => {
  let container: HTMLElement;
  let clicks: number[];
  let submitted: string[];
  let dismissed: string[];
  let view: NavigatorView;

  beforeEach(() => {
    container = document.createElement("div");
    document.body.replaceChildren(container);
    clicks = [];
    submitted = [];
    dismissed = [];
    view = new NavigatorView(container, {
      onStepClick: (step) => clicks.push(step),
      onSubmit: (text) => submitted.push(text),
      onRecommendationClick: (item) => submitted.push(item.question),
      onDismiss: (item) => dismissed.push(item.id),
    });
  });

  it("renders one dot per step with the query revealed on hover", () => {
    view.setSteps(steps, 2);
    const dots = container.querySelectorAll<HTMLElement>(".step-dot");
    expect(dots).toHaveLength(3);
    expect(dots[0].title).toBe("Is vitamin E helpful for Alzheimer's disease?");
    expect(dots[2].classList.contains("current")).toBe(true);
    dots[1].click();
    expect(clicks).toEqual([1]);
  });

  it("shows the top three suggestions as individual buttons", () => {
    view.setRecommendations(recs);
    const buttons = container.querySelectorAll(".rec-button");
    expect(buttons).toHaveLength(3);
    const texts = [...container.querySelectorAll(".rec-ask")].map((b) => b.textContent);
    expect(texts).toEqual(recs.slice(0, 3).map((r) => r.question));
  });

  it("clicking a suggestion submits its question", () => {
    view.setRecommendations(recs);
    (container.querySelector(".rec-ask") as HTMLButtonElement).click();
    expect(submitted).toEqual([recs[0].question]);
  });

  it("the cross icon dismisses exactly that suggestion", () => {
    view.setRecommendations(recs);
    const crosses = container.querySelectorAll<HTMLButtonElement>(".rec-dismiss");
    crosses[1].click();
    expect(dismissed).toEqual([recs[1].id]);
  });

  it("extra suggestions land in the More list, capped at ten", () => {
    view.setRecommendations(makeItems(20));
    expect(container.querySelectorAll(".rec-button")).toHaveLength(3);
    const more = container.querySelector(".more-button")!;
    expect(more.textContent).toBe("More (10)");
    const list = container.querySelector<HTMLElement>(".more-list")!;
    expect(list.hidden).toBe(true);
    more.dispatchEvent(new MouseEvent("mouseenter"));
    expect(list.hidden).toBe(false);
    expect(list.querySelectorAll(".more-item")).toHaveLength(10);
  });

  it("progress ring always shows the server value", () => {
    view.setProgress(0.5454545454545454);
    const text = container.querySelector<HTMLElement>(".ring-text")!;
    expect(text.textContent).toBe("55%");
    expect(text.dataset.value).toBe("0.5454545454545454");
    const arc = container.querySelector(".ring-arc")!;
    expect(arc.getAttribute("stroke-dasharray")).toMatch(/^54\.84 /);
    view.setProgress(null);
    expect(text.textContent).toBe("-");
  });

  it("free-text input submits and clears", () => {
    const input = container.querySelector("input")!;
    input.value = "  a typed question  ";
    container.querySelector("form")!.dispatchEvent(new Event("submit"));
    expect(submitted).toEqual(["a typed question"]);
    expect(input.value).toBe("");
  });

  it("blank input never submits", () => {
    const input = container.querySelector("input")!;
    input.value = "   ";
    container.querySelector("form")!.dispatchEvent(new Event("submit"));
    expect(submitted).toEqual([]);
  });
});
