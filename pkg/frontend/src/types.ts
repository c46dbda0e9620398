// Wire types for the kgchat HTTP API.

export type VerdictLabel = "Support" | "Relevant" | "Unsure";

export interface EntityMatch {
  surface: string;
  node: string | null;
  similarity: number;
}

export interface TwoHopPathRef {
  first: string;
  mid: string;
  second: string;
  first_orientation: "forward" | "reverse";
  second_orientation: "forward" | "reverse";
}

export interface Verdict {
  label: VerdictLabel;
  direct_edges: string[];
  two_hop: TwoHopPathRef[];
  evidence_count: number;
  best_relation_similarity: number | null;
}

export interface TriplePayload {
  triple: {
    subject_surface: string;
    relation_surface: string;
    object_surface: string;
    subject_id: string;
    relation_id: string;
    object_id: string;
  };
  subject_match: EntityMatch;
  object_match: EntityMatch;
  verdict: Verdict;
  display_relation: string;
  step: number;
}

export interface SpanPayload {
  kind: "entity" | "relation";
  marker_id: string;
  surface: string;
  start: number;
  end: number;
  subject_ref?: string;
  object_ref?: string;
}

export interface RecommendationItem {
  id: string;
  source: string;
  target: { kind: "node" | "type"; value: string };
  question: string;
  score: number;
}

export type StreamEvent =
  | { type: "text"; payload: { delta: string } }
  | { type: "entity"; payload: SpanPayload }
  | { type: "triple"; payload: TriplePayload }
  | { type: "recommendations"; payload: { items: RecommendationItem[] } }
  | { type: "progress"; payload: { value: number } }
  | { type: "error"; payload: { code: string; message: string } }
  | { type: "done"; payload: { session_id: string; step: number; in_scope: boolean } };

export interface GraphNodePayload {
  id: string;
  name: string;
  type: string;
  step: number;
}

export interface GraphEdgePayload {
  id: string;
  source: string;
  target: string;
  relation: string;
  label: VerdictLabel;
  evidence_count: number;
  step: number;
  direct_edge_ids: string[];
}

export interface StepViewPayload {
  highlighted: string[];
  faded: string[];
  hidden: string[];
}

export interface GraphPayload {
  step: number | null;
  step_count: number;
  view: StepViewPayload | null;
  nodes: GraphNodePayload[];
  edges: GraphEdgePayload[];
}

export interface RecommendationsPayload {
  items: RecommendationItem[];
  progress: number | null;
}

export interface EvidencePayload {
  edge_id: string;
  source: string;
  target: string;
  relation: string;
  evidence: { source_id: string; title: string; year: number | null }[];
}

export interface SessionStepPayload {
  index: number;
  query_text: string;
  in_scope: boolean;
}

export interface SessionSnapshot {
  id: string;
  steps: SessionStepPayload[];
  current_step: number;
}
