import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { QueryModel, operator, technique, validateNode } from '../src/queryBuilder.js';
import type { DimensionInfo } from '../src/types.js';

const FIXTURES = join(__dirname, '..', '..', 'fixtures');

const DIMS: DimensionInfo[] = [
  { name: 'location-lat', kind: 'latitude' },
  { name: 'location-long', kind: 'longitude' },
  { name: 'alt', kind: 'numeric' },
  { name: 'uplift', kind: 'numeric' },
  { name: 'acc_y', kind: 'numeric' },
  { name: 'behavior', kind: 'categorical' },
];

describe('query builder canonical output', () => {
  it('reproduces the altitude-migration fixture byte for byte', () => {
    const model = new QueryModel();
    model.addLevel(technique('change_points', { dimension: 'alt', mode: 'fixed_k', k: 2, cost: 'l2' }));
    model.addLevel(technique('value_range', { dimension: 'uplift', r_min: 0.5, r_max: 5 }), 'bookmarked_only');
    model.addLevel(technique('value_range', { dimension: 'acc_y', r_min: -0.5, r_max: 0.5 }));
    model.addLevel(technique('temporal_gaps', { factor: 10 }));
    expect(model.validate(DIMS)).toEqual([]);
    const expected = readFileSync(join(FIXTURES, 'query_vulture.json'), 'utf-8');
    expect(model.toJson()).toBe(expected);
  });

  it('reproduces the gaps/area/clusters fixture byte for byte', () => {
    const model = new QueryModel();
    model.addLevel(technique('temporal_gaps', { factor: 10 }));
    model.addLevel(
      technique('geo_area', { polygon: [[47.7, 8.9], [47.7, 9.1], [47.5, 9.1], [47.5, 8.9]] }),
    );
    model.addLevel(technique('density_clusters', { eps: 25, min_pts: 5 }), 'bookmarked_only');
    expect(model.validate(DIMS)).toEqual([]);
    const expected = readFileSync(join(FIXTURES, 'query_cat.json'), 'utf-8');
    expect(model.toJson()).toBe(expected);
  });

  it('serializes params in canonical order regardless of construction order', () => {
    const a = technique('value_range', { r_max: 5, dimension: 'alt', r_min: 1 });
    expect(JSON.stringify(a)).toBe(
      '{"technique":{"type":"value_range","params":{"dimension":"alt","r_min":1,"r_max":5}}}',
    );
  });

  it('serializes theta only for AFTER and NEAR', () => {
    const after = operator('AFTER', [technique('temporal_gaps', { factor: 10 }), technique('temporal_gaps', { factor: 5 })], 3);
    expect(JSON.stringify(after)).toContain('"op":"AFTER","theta":3,"operands"');
    const or = operator('OR', [technique('temporal_gaps', { factor: 10 }), technique('temporal_gaps', { factor: 5 })]);
    expect(JSON.stringify(or)).not.toContain('theta');
  });

  it('drops the inactive size parameter for change points', () => {
    const penalty = technique('change_points', { dimension: 'alt', mode: 'penalty', k: 2, beta: 9, cost: 'l2' });
    expect(Object.keys(penalty.technique.params)).toEqual(['dimension', 'mode', 'beta', 'cost']);
  });
});

describe('hierarchy editing', () => {
  it('levels re-index when a middle level is removed', () => {
    const model = new QueryModel();
    model.addLevel(technique('temporal_gaps', { factor: 1 }));
    model.addLevel(technique('temporal_gaps', { factor: 2 }));
    model.addLevel(technique('temporal_gaps', { factor: 3 }));
    model.removeLevel(1);
    const factors = model.levels.map(
      (lv) => ('technique' in lv.node ? lv.node.technique.params['factor'] : null),
    );
    expect(factors).toEqual([1, 3]);
  });

  it('levels are sortable along the hierarchy', () => {
    const model = new QueryModel();
    model.addLevel(technique('temporal_gaps', { factor: 1 }));
    model.addLevel(technique('temporal_gaps', { factor: 2 }));
    model.moveLevel(1, 0);
    const factors = model.levels.map(
      (lv) => ('technique' in lv.node ? lv.node.technique.params['factor'] : null),
    );
    expect(factors).toEqual([2, 1]);
  });
});

describe('validation blocks invalid queries', () => {
  it('rejects out-of-range and mistyped parameters', () => {
    expect(validateNode(technique('change_points', { dimension: 'alt', mode: 'fixed_k', k: 0, cost: 'l2' }), DIMS))
      .not.toEqual([]);
    expect(validateNode(technique('motif_representatives', { dimension: 'alt', motif_length: 1, top_k: 1 }), DIMS))
      .not.toEqual([]);
    expect(validateNode(technique('geo_area', { polygon: [[95, 0], [0, 1], [1, 1]] }), DIMS)).not.toEqual([]);
    expect(validateNode(technique('categorical_change', { dimension: 'alt' }), DIMS)).not.toEqual([]);
  });

  it('rejects bad operator arity and tolerance', () => {
    const one = technique('temporal_gaps', { factor: 5 });
    expect(validateNode(operator('NOT', [one, one]), DIMS)).not.toEqual([]);
    expect(validateNode(operator('AFTER', [one, one], -1), DIMS)).not.toEqual([]);
    expect(validateNode(operator('OR', [one]), DIMS)).not.toEqual([]);
  });

  it('an empty hierarchy cannot be submitted', () => {
    expect(new QueryModel().validate(DIMS)).not.toEqual([]);
  });
});
