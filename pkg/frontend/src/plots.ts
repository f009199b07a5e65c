/** Lightweight SVG line charts for the main window and detail views. */

import type { DetailPayload } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const SERIES_COLORS = ['#2b6cb0', '#c05621', '#2f855a', '#6b46c1', '#b83280', '#4a5568'];

export interface PlotOptions {
  width?: number;
  height?: number;
  /** plotted index domain; defaults to the payload range */
  domain?: [number, number];
  /** fit y to the local extrema of the visible domain */
  localY?: boolean;
  /** break the line when the time delta exceeds gapFactor * median delta */
  hideGaps?: boolean;
  gapFactor?: number;
  onHoverIndex?: (index: number | null) => void;
}

export interface LinePlot {
  svg: SVGSVGElement;
  setDomain(domain: [number, number]): void;
  setCues(indices: number[]): void;
  xFor(index: number): number;
  yFor(dim: string, value: number): number;
  options: Required<Pick<PlotOptions, 'width' | 'height'>> & PlotOptions;
}

const MARGIN = { left: 46, right: 8, top: 6, bottom: 18 };

/** Render line traces for the payload's numeric dimensions into `container`. */
export function renderLinePlot(
  container: HTMLElement,
  payload: DetailPayload,
  dims: string[],
  options: PlotOptions = {},
): LinePlot {
  const width = options.width ?? 860;
  const height = options.height ?? 180;
  const svg = document.createElementNS(SVG_NS, 'svg') as SVGSVGElement;
  svg.setAttribute('class', 'line-plot');
  svg.setAttribute('width', String(width));
  svg.setAttribute('height', String(height));
  container.appendChild(svg);

  let domain: [number, number] = options.domain ?? [payload.from, payload.to];
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;

  const numericDims = dims.filter((d) => typeof (payload.values[d] ?? [])[0] !== 'string');
  let yLo = 0;
  let yHi = 1;

  const xFor = (index: number) =>
    MARGIN.left + ((index - domain[0]) / Math.max(1, domain[1] - domain[0])) * innerW;
  const yFor = (_dim: string, v: number) =>
    MARGIN.top + innerH - ((v - yLo) / (yHi - yLo || 1)) * innerH;

  const gapBreaks = new Set<number>();
  if (options.hideGaps !== false && payload.timestamps.length > 2) {
    const deltas = payload.timestamps.slice(1).map((t, i) => t - payload.timestamps[i]);
    const sorted = [...deltas].sort((a, b) => a - b);
    const median = sorted[Math.floor(sorted.length / 2)] || 1;
    const factor = options.gapFactor ?? 10;
    deltas.forEach((dt, i) => {
      if (dt > factor * median) gapBreaks.add(i + 1);
    });
  }

  const plot = () => {
    svg.textContent = '';
    const visible: number[] = [];
    payload.indices.forEach((idx, i) => {
      if (idx >= domain[0] && idx <= domain[1]) visible.push(i);
    });
    const pool: number[] = [];
    for (const d of numericDims) {
      const col = payload.values[d] ?? [];
      const source = options.localY ? visible : col.map((_, i) => i);
      for (const i of source) {
        const v = col[i];
        if (typeof v === 'number') pool.push(v);
      }
    }
    yLo = pool.length ? Math.min(...pool) : 0;
    yHi = pool.length ? Math.max(...pool) : 1;
    if (yLo === yHi) {
      yLo -= 1;
      yHi += 1;
    }

    const axis = document.createElementNS(SVG_NS, 'g');
    axis.setAttribute('class', 'axis');
    for (const f of [0, 0.5, 1]) {
      const v = yLo + f * (yHi - yLo);
      const ty = yFor('', v);
      const line = document.createElementNS(SVG_NS, 'line');
      line.setAttribute('x1', String(MARGIN.left));
      line.setAttribute('x2', String(width - MARGIN.right));
      line.setAttribute('y1', String(ty));
      line.setAttribute('y2', String(ty));
      line.setAttribute('class', 'grid');
      axis.appendChild(line);
      const label = document.createElementNS(SVG_NS, 'text');
      label.setAttribute('x', '2');
      label.setAttribute('y', String(ty + 3));
      label.setAttribute('class', 'tick');
      label.textContent = v.toPrecision(4);
      axis.appendChild(label);
    }
    svg.appendChild(axis);

    // thicker lines when point density is low
    const density = visible.length / Math.max(1, innerW);
    const strokeWidth = density < 0.15 ? 2.2 : density < 0.75 ? 1.4 : 0.9;

    numericDims.forEach((d, di) => {
      const col = payload.values[d] ?? [];
      let path = '';
      let pen = false;
      visible.forEach((i) => {
        const v = col[i];
        if (typeof v !== 'number' || gapBreaks.has(i)) {
          pen = pen && typeof v === 'number';
          if (!pen && typeof v === 'number') {
            path += `M${xFor(payload.indices[i]).toFixed(1)},${yFor(d, v).toFixed(1)}`;
            pen = true;
          }
          return;
        }
        path += `${pen ? 'L' : 'M'}${xFor(payload.indices[i]).toFixed(1)},${yFor(d, v).toFixed(1)}`;
        pen = true;
      });
      const el = document.createElementNS(SVG_NS, 'path');
      el.setAttribute('class', `trace trace-${d}`);
      el.setAttribute('d', path);
      el.setAttribute('fill', 'none');
      el.setAttribute('stroke', SERIES_COLORS[di % SERIES_COLORS.length]);
      el.setAttribute('stroke-width', String(strokeWidth));
      svg.appendChild(el);
    });

    const cueLayer = document.createElementNS(SVG_NS, 'g');
    cueLayer.setAttribute('class', 'cues');
    svg.appendChild(cueLayer);
  };

  plot();

  svg.addEventListener('mousemove', (ev) => {
    const e = ev as MouseEvent;
    const frac = (e.offsetX - MARGIN.left) / innerW;
    if (frac < 0 || frac > 1) {
      options.onHoverIndex?.(null);
      return;
    }
    options.onHoverIndex?.(Math.round(domain[0] + frac * (domain[1] - domain[0])));
  });
  svg.addEventListener('mouseleave', () => options.onHoverIndex?.(null));

  return {
    svg,
    options: { ...options, width, height },
    xFor,
    yFor,
    setDomain(next: [number, number]) {
      domain = next;
      plot();
    },
    setCues(indices: number[]) {
      const layer = svg.querySelector('g.cues');
      if (!layer) return;
      layer.textContent = '';
      for (const idx of indices) {
        if (idx < domain[0] || idx > domain[1]) continue;
        const line = document.createElementNS(SVG_NS, 'line');
        line.setAttribute('class', 'cue');
        line.setAttribute('x1', String(xFor(idx)));
        line.setAttribute('x2', String(xFor(idx)));
        line.setAttribute('y1', String(MARGIN.top));
        line.setAttribute('y2', String(height - MARGIN.bottom));
        layer.appendChild(line);
      }
    },
  };
}
