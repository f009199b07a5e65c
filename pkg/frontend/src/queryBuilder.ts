/** Query model behind the building-block dialog.
 *
 * Emitted JSON is canonical: key order matches the engine's serializer
 * exactly, so building a known query reproduces its fixture byte for byte,
 * and every emitted document is schema-valid before it reaches the server.
 */

import type {
  DimensionInfo,
  OperatorNodeDoc,
  QueryDoc,
  QueryLevelDoc,
  QueryNodeDoc,
  Selector,
  TechniqueNodeDoc,
} from './types.js';

export interface ParamSpec {
  key: string;
  label: string;
  kind: 'number' | 'integer' | 'string' | 'choice' | 'pattern' | 'polygon' | 'dimension';
  choices?: string[];
  min?: number;
  max?: number;
  suggested?: unknown;
  optional?: boolean;
  dimensionKinds?: string[];
}

export interface TechniqueMeta {
  type: string;
  title: string;
  category: 'Value-Independent' | 'Generic Value-Based' | 'GPS-Based';
  help: string;
  params: ParamSpec[];
}

const NUMERIC_KINDS = ['numeric', 'latitude', 'longitude'];

/** Catalog shown in the dialog, grouped by category; param order is canonical. */
export const TECHNIQUE_CATALOG: TechniqueMeta[] = [
  {
    type: 'temporal_gaps',
    title: 'Temporal Gaps',
    category: 'Value-Independent',
    help: 'Splits after anomalously large time differences between records.',
    params: [{ key: 'factor', label: 'robust z threshold', kind: 'number', min: 0, suggested: 10 }],
  },
  {
    type: 'bins',
    title: 'Bins',
    category: 'Value-Independent',
    help: 'Fixed-width bins by record count, duration, or calendar unit.',
    params: [
      { key: 'mode', label: 'mode', kind: 'choice', choices: ['count', 'duration', 'calendar'] },
      { key: 'width', label: 'width (records | ms | day/week/month)', kind: 'string' },
    ],
  },
  {
    type: 'change_points',
    title: 'Change Points',
    category: 'Generic Value-Based',
    help: 'Least-squares change points: exact count (k) or penalized (beta).',
    params: [
      { key: 'dimension', label: 'dimension', kind: 'dimension', dimensionKinds: NUMERIC_KINDS },
      { key: 'mode', label: 'mode', kind: 'choice', choices: ['fixed_k', 'penalty'] },
      { key: 'k', label: 'change points', kind: 'integer', min: 1, suggested: 2, optional: true },
      { key: 'beta', label: 'penalty', kind: 'number', min: 0, optional: true },
      { key: 'cost', label: 'cost', kind: 'choice', choices: ['l2'], suggested: 'l2' },
    ],
  },
  {
    type: 'value_range',
    title: 'Numerical Value Range',
    category: 'Generic Value-Based',
    help: 'Splits when entering or leaving [min, max].',
    params: [
      { key: 'dimension', label: 'dimension', kind: 'dimension', dimensionKinds: NUMERIC_KINDS },
      { key: 'r_min', label: 'range minimum', kind: 'number' },
      { key: 'r_max', label: 'range maximum', kind: 'number' },
    ],
  },
  {
    type: 'categorical_change',
    title: 'Categorical Values',
    category: 'Generic Value-Based',
    help: 'Splits whenever the categorical value changes.',
    params: [
      { key: 'dimension', label: 'dimension', kind: 'dimension', dimensionKinds: ['categorical'] },
    ],
  },
  {
    type: 'seasonality',
    title: 'Seasonal Patterns',
    category: 'Generic Value-Based',
    help: 'Splits at multiples of the power-maximizing periodogram period.',
    params: [
      { key: 'dimension', label: 'dimension', kind: 'dimension', dimensionKinds: NUMERIC_KINDS },
      { key: 'min_cycles', label: 'minimum full cycles', kind: 'integer', min: 1, suggested: 2 },
    ],
  },
  {
    type: 'motif_representatives',
    title: 'Motif Representatives',
    category: 'Generic Value-Based',
    help: 'Splits where the best recurring subsequences begin and end.',
    params: [
      { key: 'dimension', label: 'dimension', kind: 'dimension', dimensionKinds: NUMERIC_KINDS },
      { key: 'motif_length', label: 'motif length', kind: 'integer', min: 2 },
      { key: 'top_k', label: 'motif pairs', kind: 'integer', min: 1, suggested: 1 },
    ],
  },
  {
    type: 'pattern_matches',
    title: 'Pattern Matches',
    category: 'Generic Value-Based',
    help: 'Splits at matches of a query pattern (z-normalized distance).',
    params: [
      { key: 'dimension', label: 'dimension', kind: 'dimension', dimensionKinds: NUMERIC_KINDS },
      { key: 'pattern', label: 'pattern values', kind: 'pattern' },
      { key: 'threshold', label: 'distance threshold', kind: 'number', min: 0 },
      { key: 'distance', label: 'distance', kind: 'choice', choices: ['znorm_euclidean'], suggested: 'znorm_euclidean' },
    ],
  },
  {
    type: 'geo_area',
    title: 'Geographical Area',
    category: 'GPS-Based',
    help: 'Splits when entering or leaving the polygon (paste coordinates from the map).',
    params: [{ key: 'polygon', label: '[lat, long] vertices', kind: 'polygon' }],
  },
  {
    type: 'density_clusters',
    title: 'Density Clusters',
    category: 'GPS-Based',
    help: 'Splits when entering or leaving a spatial density cluster.',
    params: [
      { key: 'eps', label: 'neighborhood radius (m)', kind: 'number', min: 0 },
      { key: 'min_pts', label: 'minimum points', kind: 'integer', min: 1 },
    ],
  },
  {
    type: 'fpt_minima',
    title: 'First-Passage Time Minima',
    category: 'GPS-Based',
    help: 'Splits at prominent minima of the time to leave a circle of the given radius.',
    params: [
      { key: 'radius', label: 'circle radius (m)', kind: 'number', min: 0 },
      { key: 'prominence', label: 'prominence (s)', kind: 'number', min: 0, suggested: 0 },
    ],
  },
];

export function techniqueMeta(type: string): TechniqueMeta {
  const meta = TECHNIQUE_CATALOG.find((t) => t.type === type);
  if (!meta) throw new Error(`unknown technique ${type}`);
  return meta;
}

/** Dimensions of the active series whose kind suits the technique parameter. */
export function suggestedDimensions(spec: ParamSpec, dims: DimensionInfo[]): string[] {
  const kinds = spec.dimensionKinds ?? NUMERIC_KINDS;
  return dims.filter((d) => kinds.includes(d.kind)).map((d) => d.name);
}

/** Canonical parameter ordering per technique (mirrors the engine serializer). */
const PARAM_ORDER: Record<string, string[]> = {
  temporal_gaps: ['factor'],
  bins: ['mode', 'width'],
  change_points: ['dimension', 'mode', 'k', 'beta', 'cost'],
  value_range: ['dimension', 'r_min', 'r_max'],
  categorical_change: ['dimension'],
  seasonality: ['dimension', 'min_cycles'],
  motif_representatives: ['dimension', 'motif_length', 'top_k'],
  pattern_matches: ['dimension', 'pattern', 'threshold', 'distance'],
  geo_area: ['polygon'],
  density_clusters: ['eps', 'min_pts'],
  fpt_minima: ['radius', 'prominence'],
};

/** Build a technique node with canonically ordered params. */
export function technique(type: string, params: Record<string, unknown>): TechniqueNodeDoc {
  techniqueMeta(type);
  const order = PARAM_ORDER[type];
  const canonical: Record<string, unknown> = {};
  for (const key of order) {
    if (params[key] !== undefined) canonical[key] = params[key];
  }
  for (const key of Object.keys(params)) {
    if (!order.includes(key)) canonical[key] = params[key];
  }
  if (type === 'change_points') {
    // only the mode's own size parameter is serialized
    if (canonical['mode'] === 'penalty') delete canonical['k'];
    else delete canonical['beta'];
  }
  return { technique: { type, params: canonical } };
}

/** Build an operator node; theta only serializes for AFTER/NEAR. */
export function operator(op: OperatorNodeDoc['operator']['op'], operands: QueryNodeDoc[], theta?: number): OperatorNodeDoc {
  const body: OperatorNodeDoc['operator'] =
    op === 'AFTER' || op === 'NEAR'
      ? { op, theta: theta ?? 0, operands }
      : { op, operands };
  return { operator: body };
}

export interface ValidationIssue {
  path: string;
  message: string;
}

/** Client-side validation; submission is blocked while issues exist. */
export function validateNode(node: QueryNodeDoc, dims: DimensionInfo[], path = 'node'): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  if ('operator' in node) {
    const { op, theta, operands } = node.operator;
    if (op === 'NOT' && operands.length !== 1) {
      issues.push({ path, message: 'NOT takes exactly one operand' });
    }
    if (op !== 'NOT' && operands.length < 2) {
      issues.push({ path, message: `${op} needs at least two operands` });
    }
    if ((op === 'AFTER' || op === 'NEAR') && (theta === undefined || theta < 0 || !Number.isInteger(theta))) {
      issues.push({ path: `${path}.theta`, message: 'tolerance must be a non-negative integer' });
    }
    operands.forEach((o, i) => issues.push(...validateNode(o, dims, `${path}.operands[${i}]`)));
    return issues;
  }
  const { type, params } = node.technique;
  let meta: TechniqueMeta;
  try {
    meta = techniqueMeta(type);
  } catch (e) {
    return [{ path, message: String(e) }];
  }
  for (const spec of meta.params) {
    const value = params[spec.key];
    const where = `${path}.${spec.key}`;
    if (value === undefined) {
      const sizeParam =
        type === 'change_points' && ((spec.key === 'k' && params['mode'] !== 'fixed_k') ||
          (spec.key === 'beta' && params['mode'] !== 'penalty'));
      if (!spec.optional && !sizeParam && spec.suggested === undefined) {
        issues.push({ path: where, message: `${spec.label} is required` });
      }
      continue;
    }
    switch (spec.kind) {
      case 'number':
      case 'integer':
        if (typeof value !== 'number' || Number.isNaN(value)) {
          issues.push({ path: where, message: `${spec.label} must be a number` });
        } else {
          if (spec.kind === 'integer' && !Number.isInteger(value)) {
            issues.push({ path: where, message: `${spec.label} must be an integer` });
          }
          if (spec.min !== undefined && value < spec.min) {
            issues.push({ path: where, message: `${spec.label} must be >= ${spec.min}` });
          }
          if (spec.max !== undefined && value > spec.max) {
            issues.push({ path: where, message: `${spec.label} must be <= ${spec.max}` });
          }
        }
        break;
      case 'choice':
        if (!spec.choices?.includes(String(value))) {
          issues.push({ path: where, message: `${spec.label} must be one of ${spec.choices?.join(', ')}` });
        }
        break;
      case 'dimension':
        if (dims.length && !suggestedDimensions(spec, dims).includes(String(value))) {
          issues.push({ path: where, message: `${value} is not a ${spec.dimensionKinds?.join('/')} dimension` });
        }
        break;
      case 'pattern':
        if (!Array.isArray(value) || value.length < 2 || value.some((v) => typeof v !== 'number')) {
          issues.push({ path: where, message: 'pattern needs at least two numbers' });
        }
        break;
      case 'polygon':
        if (
          !Array.isArray(value) ||
          value.length < 3 ||
          value.some(
            (v) =>
              !Array.isArray(v) || v.length !== 2 ||
              typeof v[0] !== 'number' || typeof v[1] !== 'number' ||
              Math.abs(v[0]) > 90 || Math.abs(v[1]) > 180,
          )
        ) {
          issues.push({ path: where, message: 'polygon needs >= 3 [lat, long] vertices' });
        }
        break;
      case 'string':
        if (type === 'bins') {
          const mode = params['mode'];
          const ok =
            mode === 'calendar'
              ? ['day', 'week', 'month'].includes(String(value))
              : typeof value === 'number' && value > 0;
          if (!ok) issues.push({ path: where, message: 'width must match the mode' });
        }
        break;
    }
  }
  return issues;
}

/** Hierarchy model: ordered levels, sortable, removable, pluggable blocks. */
export class QueryModel {
  levels: QueryLevelDoc[] = [];

  addLevel(node: QueryNodeDoc, selector: Selector = 'all', at?: number): void {
    const level = { selector, node };
    if (at === undefined || at >= this.levels.length) this.levels.push(level);
    else this.levels.splice(Math.max(0, at), 0, level);
  }

  removeLevel(index: number): void {
    this.levels.splice(index, 1); // following levels re-index implicitly
  }

  moveLevel(from: number, to: number): void {
    const [lv] = this.levels.splice(from, 1);
    this.levels.splice(to, 0, lv);
  }

  replaceNode(index: number, node: QueryNodeDoc): void {
    this.levels[index] = { ...this.levels[index], node };
  }

  setSelector(index: number, selector: Selector): void {
    this.levels[index] = { ...this.levels[index], selector };
  }

  validate(dims: DimensionInfo[]): ValidationIssue[] {
    if (!this.levels.length) return [{ path: 'levels', message: 'add at least one level' }];
    return this.levels.flatMap((lv, i) => validateNode(lv.node, dims, `levels[${i}]`));
  }

  toDoc(): QueryDoc {
    return { levels: this.levels.map((lv) => ({ selector: lv.selector, node: lv.node })) };
  }

  /** Canonical JSON; round-trips unchanged through the engine's parser. */
  toJson(): string {
    return JSON.stringify(this.toDoc());
  }
}
