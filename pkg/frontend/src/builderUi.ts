/** DOM dialog around QueryModel: pick a technique, set parameters, place the
 * block in the hierarchy (blinking slot), click to edit, right-click to
 * remove, reorder levels along the y-axis. */

import {
  QueryModel,
  TECHNIQUE_CATALOG,
  suggestedDimensions,
  technique,
  validateNode,
  type TechniqueMeta,
} from './queryBuilder.js';
import type { DimensionInfo, QueryNodeDoc, Selector } from './types.js';

export interface BuilderCallbacks {
  onSubmit: (queryJson: string) => void;
}

export class BuilderDialog {
  readonly model = new QueryModel();
  private dims: DimensionInfo[] = [];
  private pending: QueryNodeDoc | null = null;
  private editIndex: number | null = null;
  private readonly root: HTMLElement;

  constructor(container: HTMLElement, private readonly callbacks: BuilderCallbacks) {
    this.root = document.createElement('div');
    this.root.className = 'builder';
    container.appendChild(this.root);
    this.render();
  }

  setDimensions(dims: DimensionInfo[]): void {
    this.dims = dims;
    this.render();
  }

  render(): void {
    this.root.textContent = '';

    const catalog = document.createElement('div');
    catalog.className = 'builder-catalog';
    const byCategory = new Map<string, TechniqueMeta[]>();
    for (const meta of TECHNIQUE_CATALOG) {
      byCategory.set(meta.category, [...(byCategory.get(meta.category) ?? []), meta]);
    }
    for (const [category, metas] of byCategory) {
      const h = document.createElement('h4');
      h.textContent = category;
      catalog.appendChild(h);
      for (const meta of metas) {
        const row = document.createElement('div');
        row.className = 'catalog-item';
        const btn = document.createElement('button');
        btn.textContent = meta.title;
        btn.addEventListener('click', () => this.openForm(meta));
        const help = document.createElement('span');
        help.className = 'help';
        help.textContent = '?';
        help.title = meta.help;
        row.appendChild(btn);
        row.appendChild(help);
        catalog.appendChild(row);
      }
    }
    this.root.appendChild(catalog);

    const form = document.createElement('div');
    form.className = 'builder-form';
    this.root.appendChild(form);

    const hierarchy = document.createElement('div');
    hierarchy.className = 'builder-hierarchy';
    const title = document.createElement('h4');
    title.textContent = 'Hierarchy';
    hierarchy.appendChild(title);
    this.model.levels.forEach((lv, i) => {
      hierarchy.appendChild(this.levelRow(lv.node, lv.selector, i));
    });
    if (this.pending) {
      const slot = document.createElement('div');
      slot.className = 'level-slot blinking';
      slot.textContent = 'click to place the block here';
      slot.addEventListener('click', () => this.placePending());
      hierarchy.appendChild(slot);
    }
    const submit = document.createElement('button');
    submit.className = 'run-query';
    submit.textContent = 'Run query';
    const issues = this.model.levels.length ? this.model.validate(this.dims) : [];
    if (issues.length || !this.model.levels.length) submit.setAttribute('disabled', 'disabled');
    submit.addEventListener('click', () => {
      if (!this.model.validate(this.dims).length) {
        this.callbacks.onSubmit(this.model.toJson());
      }
    });
    hierarchy.appendChild(submit);
    if (issues.length) {
      const err = document.createElement('div');
      err.className = 'builder-errors';
      err.textContent = issues.map((i) => `${i.path}: ${i.message}`).join(' | ');
      hierarchy.appendChild(err);
    }
    this.root.appendChild(hierarchy);
  }

  private levelRow(node: QueryNodeDoc, selector: Selector, index: number): HTMLElement {
    const row = document.createElement('div');
    row.className = 'level-row';
    row.setAttribute('data-level', String(index));

    const block = document.createElement('span');
    block.className = 'block';
    block.textContent = describeNode(node);
    block.title = 'click to edit, right-click to remove';
    block.addEventListener('click', () => {
      this.editIndex = index;
      if ('technique' in node) {
        const meta = TECHNIQUE_CATALOG.find((m) => m.type === node.technique.type);
        if (meta) this.openForm(meta, node.technique.params);
      }
    });
    block.addEventListener('contextmenu', (ev) => {
      ev.preventDefault();
      this.model.removeLevel(index);
      this.render();
    });
    row.appendChild(block);

    const sel = document.createElement('select');
    for (const s of ['all', 'bookmarked_only']) {
      const opt = document.createElement('option');
      opt.value = s;
      opt.textContent = s;
      if (s === selector) opt.setAttribute('selected', 'selected');
      sel.appendChild(opt);
    }
    sel.addEventListener('change', () => {
      this.model.setSelector(index, sel.value as Selector);
    });
    row.appendChild(sel);

    const up = document.createElement('button');
    up.textContent = '↑';
    up.addEventListener('click', () => {
      if (index > 0) this.model.moveLevel(index, index - 1);
      this.render();
    });
    const down = document.createElement('button');
    down.textContent = '↓';
    down.addEventListener('click', () => {
      if (index < this.model.levels.length - 1) this.model.moveLevel(index, index + 1);
      this.render();
    });
    row.appendChild(up);
    row.appendChild(down);
    return row;
  }

  private openForm(meta: TechniqueMeta, current?: Record<string, unknown>): void {
    const form = this.root.querySelector('.builder-form');
    if (!form) return;
    form.textContent = '';
    const h = document.createElement('h4');
    h.textContent = meta.title;
    form.appendChild(h);

    const inputs = new Map<string, HTMLInputElement | HTMLSelectElement>();
    for (const spec of meta.params) {
      const label = document.createElement('label');
      label.textContent = spec.label;
      let input: HTMLInputElement | HTMLSelectElement;
      if (spec.kind === 'choice' || spec.kind === 'dimension') {
        input = document.createElement('select');
        const values =
          spec.kind === 'choice' ? spec.choices ?? [] : suggestedDimensions(spec, this.dims);
        for (const v of values) {
          const opt = document.createElement('option');
          opt.value = v;
          opt.textContent = v;
          input.appendChild(opt);
        }
      } else {
        input = document.createElement('input');
        input.setAttribute('type', 'text');
        if (spec.suggested !== undefined) input.value = String(spec.suggested);
      }
      if (current && current[spec.key] !== undefined) {
        input.value =
          typeof current[spec.key] === 'object'
            ? JSON.stringify(current[spec.key])
            : String(current[spec.key]);
      }
      input.setAttribute('data-param', spec.key);
      inputs.set(spec.key, input);
      label.appendChild(input);
      form.appendChild(label);
    }

    const error = document.createElement('div');
    error.className = 'form-error';
    form.appendChild(error);

    const add = document.createElement('button');
    add.className = 'stage-block';
    add.textContent = this.editIndex === null ? 'Place block' : 'Apply changes';
    add.addEventListener('click', () => {
      const params: Record<string, unknown> = {};
      for (const spec of meta.params) {
        const rawEl = inputs.get(spec.key);
        const raw = rawEl ? rawEl.value.trim() : '';
        if (raw === '') continue;
        params[spec.key] = parseParam(spec.kind, raw);
      }
      const node = technique(meta.type, params);
      const issues = validateNode(node, this.dims);
      if (issues.length) {
        error.textContent = issues.map((i) => i.message).join(' | ');
        return; // invalid parameters block submission
      }
      if (this.editIndex !== null) {
        this.model.replaceNode(this.editIndex, node);
        this.editIndex = null;
        this.pending = null;
      } else {
        this.pending = node;
      }
      this.render();
    });
    form.appendChild(add);
  }

  private placePending(): void {
    if (!this.pending) return;
    this.model.addLevel(this.pending, 'all');
    this.pending = null;
    this.render();
  }
}

function parseParam(kind: string, raw: string): unknown {
  if (kind === 'number' || kind === 'integer') {
    const v = Number(raw);
    return Number.isNaN(v) ? raw : v;
  }
  if (kind === 'pattern' || kind === 'polygon') {
    try {
      return JSON.parse(raw);
    } catch {
      return raw;
    }
  }
  if (kind === 'string') {
    const v = Number(raw);
    return Number.isNaN(v) ? raw : v; // bins width: number or calendar unit
  }
  return raw;
}

export function describeNode(node: QueryNodeDoc): string {
  if ('technique' in node) {
    const p = node.technique.params;
    const brief = Object.entries(p)
      .filter(([, v]) => typeof v !== 'object')
      .map(([k, v]) => `${k}=${v}`)
      .join(', ');
    return `${node.technique.type}(${brief})`;
  }
  const inner = node.operator.operands.map(describeNode).join(', ');
  const theta = node.operator.theta !== undefined ? `[θ=${node.operator.theta}]` : '';
  return `${node.operator.op}${theta}(${inner})`;
}
