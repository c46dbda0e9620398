// Graph explorer: SVG node-link rendering of the conversation graph.
// Nodes are color-coded by type (same coding as the text highlights);
// every edge carries its label (relation name, verdict icon, literature
// count) and unsure edges are drawn dashed. The step view partition from
// the server decides which elements are highlighted, faded, or hidden.
// Positions come from a deterministic force layout; dragging a node pins
// it, and pins persist locally per session.

import { runLayout, seedPosition, type LayoutNode } from "./forcelayout.js";
import { colorForType, edgeLabelText } from "./theme.js";
import type { GraphEdgePayload, GraphPayload, StepViewPayload } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphCallbacks {
  onNodeHover?: (nodeId: string, active: boolean) => void;
  onNodeClick?: (nodeId: string) => void;
  onEdgeLabelClick?: (edge: GraphEdgePayload) => void;
}

interface PositionedNode extends LayoutNode {
  name: string;
  type: string;
}

export class GraphView {
  private svg: SVGSVGElement;
  private positions = new Map<string, PositionedNode>();
  private data: GraphPayload | null = null;
  private pinned: Record<string, { x: number; y: number }> = {};
  private storageKey = "kgchat-positions";
  private width: number;
  private height: number;

  constructor(
    private container: HTMLElement,
    private callbacks: GraphCallbacks = {},
    options: { width?: number; height?: number } = {},
  ) {
    this.width = options.width ?? 640;
    this.height = options.height ?? 480;
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${this.width} ${this.height}`);
    this.svg.classList.add("graph-canvas");
    this.container.append(this.svg);
  }

  /** Scope position persistence to one session. */
  setSession(sessionId: string): void {
    this.storageKey = `kgchat-positions-${sessionId}`;
    try {
      this.pinned = JSON.parse(localStorage.getItem(this.storageKey) ?? "{}");
    } catch {
      this.pinned = {};
    }
  }

  setData(payload: GraphPayload): void {
    this.data = payload;
    for (const node of payload.nodes) {
      let positioned = this.positions.get(node.id);
      if (!positioned) {
        const pin = this.pinned[node.id];
        const seed = pin ?? seedPosition(node.id, this.width, this.height);
        positioned = {
          id: node.id,
          x: seed.x,
          y: seed.y,
          pinned: Boolean(pin),
          name: node.name,
          type: node.type,
        };
        this.positions.set(node.id, positioned);
      }
    }
    const layoutNodes = payload.nodes.map((n) => this.positions.get(n.id)!);
    runLayout(layoutNodes, payload.edges, {
      width: this.width,
      height: this.height,
      iterations: 120,
    });
    this.render();
    if (payload.view) this.applyStepView(payload.view);
  }

  applyStepView(view: StepViewPayload): void {
    const highlighted = new Set(view.highlighted);
    const faded = new Set(view.faded);
    const hidden = new Set(view.hidden);
    for (const element of this.svg.querySelectorAll<SVGElement>("[data-graph-id]")) {
      const id = element.dataset.graphId!;
      element.classList.toggle("highlighted", highlighted.has(id));
      element.classList.toggle("faded", faded.has(id));
      element.classList.toggle("hidden", hidden.has(id));
    }
  }

  highlightNode(nodeId: string, active: boolean): void {
    for (const element of this.svg.querySelectorAll<SVGElement>(`[data-graph-id="${nodeId}"]`)) {
      element.classList.toggle("sync-highlight", active);
    }
  }

  private render(): void {
    if (!this.data) return;
    this.svg.replaceChildren();
    const edgeLayer = document.createElementNS(SVG_NS, "g");
    const nodeLayer = document.createElementNS(SVG_NS, "g");
    this.svg.append(edgeLayer, nodeLayer);
    for (const edge of this.data.edges) {
      const source = this.positions.get(edge.source);
      const target = this.positions.get(edge.target);
      if (!source || !target) continue;
      const group = document.createElementNS(SVG_NS, "g");
      group.classList.add("edge", `verdict-${edge.label.toLowerCase()}`);
      group.dataset.graphId = edge.id;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(source.x));
      line.setAttribute("y1", String(source.y));
      line.setAttribute("x2", String(target.x));
      line.setAttribute("y2", String(target.y));
      if (edge.label === "Unsure") line.classList.add("dashed");
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String((source.x + target.x) / 2));
      label.setAttribute("y", String((source.y + target.y) / 2 - 4));
      label.classList.add("edge-label");
      label.textContent = edgeLabelText(edge.relation, edge.label, edge.evidence_count);
      label.addEventListener("click", () => this.callbacks.onEdgeLabelClick?.(edge));
      group.append(line, label);
      edgeLayer.append(group);
    }
    for (const node of this.data.nodes) {
      const positioned = this.positions.get(node.id)!;
      const group = document.createElementNS(SVG_NS, "g");
      group.classList.add("node");
      group.dataset.graphId = node.id;
      group.dataset.nodeType = node.type;
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(positioned.x));
      circle.setAttribute("cy", String(positioned.y));
      circle.setAttribute("r", "14");
      circle.setAttribute("fill", colorForType(node.type));
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(positioned.x));
      label.setAttribute("y", String(positioned.y - 18));
      label.classList.add("node-label");
      label.textContent = node.name;
      group.append(circle, label);
      group.addEventListener("mouseenter", () => this.callbacks.onNodeHover?.(node.id, true));
      group.addEventListener("mouseleave", () => this.callbacks.onNodeHover?.(node.id, false));
      group.addEventListener("click", () => this.callbacks.onNodeClick?.(node.id));
      this.attachDrag(group, circle, label, node.id);
      nodeLayer.append(group);
    }
  }

  private attachDrag(
    group: SVGGElement,
    circle: SVGCircleElement,
    label: SVGTextElement,
    nodeId: string,
  ): void {
    let dragging = false;
    group.addEventListener("pointerdown", (event) => {
      dragging = true;
      try {
        if (event.pointerId !== undefined) group.setPointerCapture?.(event.pointerId);
      } catch {
        // pointer capture is an enhancement; environments without it still drag
      }
    });
    group.addEventListener("pointermove", (event) => {
      if (!dragging) return;
      const point = this.toViewBox(event);
      const positioned = this.positions.get(nodeId);
      if (!positioned) return;
      positioned.x = point.x;
      positioned.y = point.y;
      positioned.pinned = true;
      circle.setAttribute("cx", String(point.x));
      circle.setAttribute("cy", String(point.y));
      label.setAttribute("x", String(point.x));
      label.setAttribute("y", String(point.y - 18));
      this.updateEdgeEndpoints(nodeId, point.x, point.y);
    });
    group.addEventListener("pointerup", () => {
      if (!dragging) return;
      dragging = false;
      const positioned = this.positions.get(nodeId);
      if (positioned) {
        this.pinned[nodeId] = { x: positioned.x, y: positioned.y };
        try {
          localStorage.setItem(this.storageKey, JSON.stringify(this.pinned));
        } catch {
          // private-mode storage failures are non-fatal
        }
      }
    });
  }

  private updateEdgeEndpoints(nodeId: string, x: number, y: number): void {
    if (!this.data) return;
    for (const edge of this.data.edges) {
      if (edge.source !== nodeId && edge.target !== nodeId) continue;
      const group = this.svg.querySelector<SVGGElement>(`g[data-graph-id="${edge.id}"]`);
      const line = group?.querySelector("line");
      const label = group?.querySelector("text");
      if (!line || !label) continue;
      if (edge.source === nodeId) {
        line.setAttribute("x1", String(x));
        line.setAttribute("y1", String(y));
      }
      if (edge.target === nodeId) {
        line.setAttribute("x2", String(x));
        line.setAttribute("y2", String(y));
      }
      const x1 = Number(line.getAttribute("x1"));
      const y1 = Number(line.getAttribute("y1"));
      const x2 = Number(line.getAttribute("x2"));
      const y2 = Number(line.getAttribute("y2"));
      label.setAttribute("x", String((x1 + x2) / 2));
      label.setAttribute("y", String((y1 + y2) / 2 - 4));
    }
  }

  private toViewBox(event: PointerEvent): { x: number; y: number } {
    const rect = this.svg.getBoundingClientRect();
    const scaleX = rect.width > 0 ? this.width / rect.width : 1;
    const scaleY = rect.height > 0 ? this.height / rect.height : 1;
    return {
      x: (event.clientX - rect.left) * scaleX,
      y: (event.clientY - rect.top) * scaleY,
    };
  }
}
