/** Wire types mirroring the segtree service JSON. */

export interface DimensionInfo {
  name: string;
  kind: 'numeric' | 'categorical' | 'latitude' | 'longitude';
  categories?: string[];
}

export interface SeriesSummary {
  name: string;
  n: number;
  dimensions: DimensionInfo[];
  start_timestamp: string;
  end_timestamp: string;
}

export interface TreeNode {
  id: string;
  from: number;
  to: number;
  level: number;
  technique_tag: string;
  labels: string[];
  bookmarked: boolean;
  children: TreeNode[];
}

export interface TreeJson {
  series: string;
  n: number;
  node_count: number;
  warnings: { level: number; from: number; to: number; message: string }[];
  root: TreeNode;
}

export interface SiblingSimilarity {
  node_id: string;
  d_bar: number;
  scale_domain: [number, number, number];
  dimension_set: string[];
  color_position: number;
}

export interface PointAnomaly {
  index: number;
  type: string;
  score: number;
}

export interface Histogram {
  bin_count: number;
  types: string[];
  normalization: string;
  counts: number[][];
}

export interface DetailPayload {
  from: number;
  to: number;
  stride: number;
  indices: number[];
  timestamps: number[];
  start_timestamp: string;
  dimensions: { name: string; kind: string }[];
  values: Record<string, (number | string | null)[]>;
  node?: { id: string; from: number; to: number; level: number; labels: string[] };
  anomalies?: PointAnomaly[];
  histogram?: Histogram;
  overlay?: number[];
  motifs?: { from: number; to: number }[];
}

export interface ForwardedEntry {
  series: string;
  node_id: string;
}

export type Selector = 'all' | 'bookmarked_only';
export type OperatorName = 'OR' | 'AND' | 'AFTER' | 'NEAR' | 'NOT';

export interface TechniqueNodeDoc {
  technique: { type: string; params: Record<string, unknown> };
}

export interface OperatorNodeDoc {
  operator: { op: OperatorName; theta?: number; operands: QueryNodeDoc[] };
}

export type QueryNodeDoc = TechniqueNodeDoc | OperatorNodeDoc;

export interface QueryLevelDoc {
  selector: Selector;
  node: QueryNodeDoc;
}

export interface QueryDoc {
  levels: QueryLevelDoc[];
}
