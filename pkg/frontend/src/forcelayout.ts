// Small deterministic force-directed layout: spring forces along edges,
// pairwise repulsion, and gentle centering. Runs a fixed number of
// synchronous iterations, so tests and reloads produce identical positions.
// Nodes with pinned coordinates (user drag) are never moved.

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
  pinned?: boolean;
}

export interface LayoutEdge {
  source: string;
  target: string;
}

export interface LayoutOptions {
  width: number;
  height: number;
  iterations?: number;
  springLength?: number;
}

function hash01(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return ((h >>> 0) % 100000) / 100000;
}

/** Deterministic initial placement on a circle, angle derived from the id. */
export function seedPosition(id: string, width: number, height: number): { x: number; y: number } {
  const angle = hash01(id) * 2 * Math.PI;
  const radius = Math.min(width, height) * (0.25 + 0.15 * hash01(id + "#r"));
  return {
    x: width / 2 + radius * Math.cos(angle),
    y: height / 2 + radius * Math.sin(angle),
  };
}

export function runLayout(
  nodes: LayoutNode[],
  edges: LayoutEdge[],
  options: LayoutOptions,
): void {
  const { width, height } = options;
  const iterations = options.iterations ?? 200;
  const springLength = options.springLength ?? Math.min(width, height) / 4;
  const byId = new Map(nodes.map((n) => [n.id, n]));
  for (let round = 0; round < iterations; round++) {
    const cooling = 1 - round / iterations;
    const fx = new Map<string, number>();
    const fy = new Map<string, number>();
    for (const node of nodes) {
      fx.set(node.id, 0);
      fy.set(node.id, 0);
    }
    // repulsion
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const a = nodes[i];
        const b = nodes[j];
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let dist2 = dx * dx + dy * dy;
        if (dist2 < 1) {
          // deterministic nudge for coincident points
          dx = 0.5 + hash01(a.id + b.id);
          dy = 0.5 - hash01(b.id + a.id);
          dist2 = dx * dx + dy * dy;
        }
        const force = (springLength * springLength) / dist2;
        const dist = Math.sqrt(dist2);
        const ux = dx / dist;
        const uy = dy / dist;
        fx.set(a.id, fx.get(a.id)! + ux * force);
        fy.set(a.id, fy.get(a.id)! + uy * force);
        fx.set(b.id, fx.get(b.id)! - ux * force);
        fy.set(b.id, fy.get(b.id)! - uy * force);
      }
    }
    // springs
    for (const edge of edges) {
      const a = byId.get(edge.source);
      const b = byId.get(edge.target);
      if (!a || !b || a === b) continue;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const dist = Math.max(1, Math.sqrt(dx * dx + dy * dy));
      const force = (dist - springLength) * 0.08;
      const ux = dx / dist;
      const uy = dy / dist;
      fx.set(a.id, fx.get(a.id)! + ux * force);
      fy.set(a.id, fy.get(a.id)! + uy * force);
      fx.set(b.id, fx.get(b.id)! - ux * force);
      fy.set(b.id, fy.get(b.id)! - uy * force);
    }
    // centering + integration
    for (const node of nodes) {
      if (node.pinned) continue;
      const cx = (width / 2 - node.x) * 0.02;
      const cy = (height / 2 - node.y) * 0.02;
      const stepX = (fx.get(node.id)! + cx) * 0.1 * cooling;
      const stepY = (fy.get(node.id)! + cy) * 0.1 * cooling;
      const cap = 20 * cooling + 1;
      node.x += Math.max(-cap, Math.min(cap, stepX));
      node.y += Math.max(-cap, Math.min(cap, stepY));
      node.x = Math.max(20, Math.min(width - 20, node.x));
      node.y = Math.max(20, Math.min(height - 20, node.y));
    }
  }
}
