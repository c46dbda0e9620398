import { beforeEach, describe, expect, it } from "vitest";

import { GraphView } from "../src/graph.js";
import type { GraphEdgePayload, GraphPayload } from "../src/types.js";
import caseGraphs from "./fixtures/case3-graphs.json";
import ginkgoGraph from "./fixtures/ginkgo-graph.json";

const graphs = caseGraphs as unknown as Record<string, GraphPayload>;

describe("GraphView", () => {
  let container: HTMLElement;
  let clickedEdges: GraphEdgePayload[];
  let hovered: [string, boolean][];
  let view: GraphView;

  beforeEach(() => {
    localStorage.clear();
    container = document.createElement("div");
    document.body.replaceChildren(container);
    clickedEdges = [];
    hovered = [];
    view = new GraphView(container, {
      onEdgeLabelClick: (edge) => clickedEdges.push(edge),
      onNodeHover: (nodeId, active) => hovered.push([nodeId, active]),
    });
    view.setSession("test-session");
  });

  it("renders every node and edge with the server's partition applied", () => {
    const payload = graphs["2"];
    view.setData(payload);
    const nodeGroups = container.querySelectorAll("g.node");
    const edgeGroups = container.querySelectorAll("g.edge");
    expect(nodeGroups).toHaveLength(payload.nodes.length);
    expect(edgeGroups).toHaveLength(payload.edges.length);
    // the last step hides nothing
    expect(container.querySelectorAll(".hidden")).toHaveLength(0);
    const highlightedIds = new Set(
      [...container.querySelectorAll(".highlighted")].map(
        (el) => (el as SVGElement).dataset.graphId,
      ),
    );
    expect(highlightedIds).toEqual(new Set(payload.view!.highlighted));
  });

  it("step-back hides later steps and fades earlier ones", () => {
    view.setData(graphs["2"]);
    view.setData(graphs["1"]);
    const byClass = (name: string) =>
      new Set(
        [...container.querySelectorAll(`.${name}`)].map(
          (el) => (el as SVGElement).dataset.graphId,
        ),
      );
    expect(byClass("hidden")).toEqual(new Set(graphs["1"].view!.hidden));
    expect(byClass("faded")).toEqual(new Set(graphs["1"].view!.faded));
    expect(byClass("highlighted")).toEqual(new Set(graphs["1"].view!.highlighted));
    // hidden covers exactly step-2 additions
    for (const id of graphs["1"].view!.hidden) {
      const element = container.querySelector(`[data-graph-id="${id}"]`)!;
      expect(element.classList.contains("hidden")).toBe(true);
    }
  });

  it("edge labels carry relation name, verdict icon, and evidence count", () => {
    const payload = graphs["2"];
    view.setData(payload);
    const labels = [...container.querySelectorAll(".edge-label")].map((el) => el.textContent);
    const supportEdge = payload.edges.find((e) => e.label === "Support")!;
    expect(labels).toContain(
      `${supportEdge.relation} ✓ (${supportEdge.evidence_count})`,
    );
    expect(supportEdge.evidence_count).toBeGreaterThan(0);
  });

  it("unsure edges are dashed", () => {
    view.setData(ginkgoGraph as unknown as GraphPayload);
    const unsure = container.querySelector("g.verdict-unsure line")!;
    expect(unsure.classList.contains("dashed")).toBe(true);
    const solidCase = graphs["2"];
    view.setData(solidCase);
    for (const line of container.querySelectorAll("g.verdict-support line")) {
      expect(line.classList.contains("dashed")).toBe(false);
    }
  });

  it("clicking an edge label reports the edge for the evidence pop-up", () => {
    const payload = graphs["2"];
    view.setData(payload);
    const label = container.querySelector(".edge-label")!;
    label.dispatchEvent(new MouseEvent("click"));
    expect(clickedEdges).toHaveLength(1);
    expect(payload.edges.map((e) => e.id)).toContain(clickedEdges[0].id);
  });

  it("hovering a node reports it for text synchronization", () => {
    view.setData(graphs["0"]);
    const node = container.querySelector('g.node[data-graph-id="C0006"]')!;
    node.dispatchEvent(new MouseEvent("mouseenter"));
    node.dispatchEvent(new MouseEvent("mouseleave"));
    expect(hovered).toEqual([
      ["C0006", true],
      ["C0006", false],
    ]);
  });

  it("highlightNode toggles the sync class", () => {
    view.setData(graphs["0"]);
    view.highlightNode("C0002", true);
    expect(container.querySelectorAll(".sync-highlight")).toHaveLength(1);
    view.highlightNode("C0002", false);
    expect(container.querySelectorAll(".sync-highlight")).toHaveLength(0);
  });

  it("layout is deterministic for the same data", () => {
    view.setData(graphs["2"]);
    const positions = [...container.querySelectorAll("g.node circle")].map((c) => [
      c.getAttribute("cx"),
      c.getAttribute("cy"),
    ]);
    const other = document.createElement("div");
    document.body.append(other);
    const third = new GraphView(other);
    third.setSession("test-session");
    third.setData(graphs["2"]);
    const positionsThird = [...other.querySelectorAll("g.node circle")].map((c) => [
      c.getAttribute("cx"),
      c.getAttribute("cy"),
    ]);
    expect(positionsThird).toEqual(positions);
  });

  it("dragging pins a node and persists its position per session", () => {
    view.setData(graphs["0"]);
    const group = container.querySelector('g.node[data-graph-id="C0006"]')!;
    // jsdom has no PointerEvent; pointer listeners fire on matching type names
    group.dispatchEvent(new MouseEvent("pointerdown", { bubbles: true }));
    group.dispatchEvent(
      new MouseEvent("pointermove", { bubbles: true, clientX: 100, clientY: 80 }),
    );
    group.dispatchEvent(new MouseEvent("pointerup", { bubbles: true }));
    const stored = JSON.parse(localStorage.getItem("kgchat-positions-test-session")!);
    expect(stored).toHaveProperty("C0006");
    // graph data untouched by dragging
    expect(graphs["0"].nodes.find((n) => n.id === "C0006")).toBeDefined();
  });
});
