// Shared visual coding: one color per node type, used identically for graph
// nodes and text highlights, plus the verdict icons shown on edge labels.

const PALETTE = [
  "#4e79a7",
  "#f28e2b",
  "#59a14f",
  "#e15759",
  "#b07aa1",
  "#76b7b2",
  "#edc948",
  "#9c755f",
];

const assigned = new Map<string, string>();

export function colorForType(nodeType: string): string {
  let color = assigned.get(nodeType);
  if (!color) {
    color = PALETTE[assigned.size % PALETTE.length];
    assigned.set(nodeType, color);
  }
  return color;
}

export function resetPalette(): void {
  assigned.clear();
}

export const VERDICT_ICONS: Record<string, string> = {
  Support: "✓", // check mark
  Relevant: "i",
  Unsure: "?",
};

export function edgeLabelText(relation: string, label: string, evidenceCount: number): string {
  return `${relation} ${VERDICT_ICONS[label] ?? "?"} (${evidenceCount})`;
}
