/** Payload shapes returned by the labeling service under /v1. */

export interface Prf {
  p: number;
  r: number;
  f1: number;
}

export interface MetricsRow {
  round: number;
  labeled: number;
  recall_cand: number;
  test: Prf;
  all: Prf;
  times: Record<string, number>;
}

export interface SessionSummary {
  id: string;
  status: string;
  round: number;
  labeled: number;
  pending: number;
  budget: number;
  rounds: number;
  error: string | null;
  recall_cand: number | null;
  f1_test: number | null;
  f1_all: number | null;
}

export interface SessionDetail extends SessionSummary {
  metrics: MetricsRow[];
}

/** One record attribute as a [name, value] pair. */
export type AttributeRow = [string, string];

export interface QueueItem {
  pair: [number, number];
  r_attrs: AttributeRow[];
  s_attrs: AttributeRow[];
}

export interface Label {
  r_id: number;
  s_id: number;
  label: number;
}

export interface LabelReceipt {
  accepted: number;
  remaining: number;
}
