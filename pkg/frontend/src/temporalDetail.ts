/** Temporal detail window: enriched plot with anomaly squares, 7-slot density
 * strip, motif bars, and a linked stacked bar chart with a sortable legend. */

import { ANOMALY_TYPE_COLORS, redsColor } from './colors.js';
import { renderLinePlot, type LinePlot, type PlotOptions } from './plots.js';
import type { DetailPayload, Histogram } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

/** Square side shrinks with anomaly density to avoid overlap. */
export function anomalySquareSize(anomalyCount: number, plotWidth: number): number {
  const perPixel = anomalyCount / Math.max(1, plotWidth);
  if (perPixel > 0.2) return 4;
  if (perPixel > 0.05) return 7;
  return 10;
}

export interface EnrichedPlot {
  plot: LinePlot;
  setDomain(domain: [number, number]): void;
}

/** Line chart plus anomaly squares, overlay rectangles, and motif bars. */
export function renderEnrichedPlot(
  container: HTMLElement,
  payload: DetailPayload,
  dimension: string,
  options: PlotOptions = {},
): EnrichedPlot {
  const wrapper = document.createElement('div');
  wrapper.className = 'enriched-plot';
  container.appendChild(wrapper);
  const plot = renderLinePlot(wrapper, payload, [dimension], { ...options, height: options.height ?? 220 });
  const svg = plot.svg;

  const decorate = () => {
    svg.querySelector('g.decorations')?.remove();
    const layer = document.createElementNS(SVG_NS, 'g');
    layer.setAttribute('class', 'decorations');
    svg.appendChild(layer);

    const overlay = payload.overlay ?? [];
    const peak = Math.max(1, ...overlay);
    const width = plot.options.width;
    const span = payload.to - payload.from + 1;
    overlay.forEach((count, i) => {
      const lo = payload.from + (i * span) / 7;
      const hi = payload.from + ((i + 1) * span) / 7;
      const rect = document.createElementNS(SVG_NS, 'rect');
      rect.setAttribute('class', 'overlay-rect');
      rect.setAttribute('data-count', String(count));
      rect.setAttribute('x', String(plot.xFor(lo)));
      rect.setAttribute('width', String(Math.max(1, plot.xFor(hi) - plot.xFor(lo))));
      rect.setAttribute('y', '12');
      rect.setAttribute('height', '8');
      rect.setAttribute('fill', redsColor(count / peak));
      rect.setAttribute('stroke', '#999999');
      rect.setAttribute('stroke-width', '0.4');
      layer.appendChild(rect);
    });

    for (const motif of payload.motifs ?? []) {
      const bar = document.createElementNS(SVG_NS, 'rect');
      bar.setAttribute('class', 'motif-bar');
      bar.setAttribute('x', String(plot.xFor(motif.from)));
      bar.setAttribute('width', String(Math.max(2, plot.xFor(motif.to) - plot.xFor(motif.from))));
      bar.setAttribute('y', '2');
      bar.setAttribute('height', '6');
      bar.setAttribute('fill', '#5b8bd0');
      layer.appendChild(bar);
    }

    const anomalies = payload.anomalies ?? [];
    const size = anomalySquareSize(anomalies.length, width);
    const column = payload.values[dimension] ?? [];
    const valueAt = new Map<number, number>();
    payload.indices.forEach((idx, i) => {
      const v = column[i];
      if (typeof v === 'number') valueAt.set(idx, v);
    });
    for (const a of anomalies) {
      const v = valueAt.get(a.index);
      if (v === undefined) continue;
      const sq = document.createElementNS(SVG_NS, 'rect');
      sq.setAttribute('class', 'anomaly-square');
      sq.setAttribute('data-index', String(a.index));
      sq.setAttribute('data-type', a.type);
      sq.setAttribute('x', String(plot.xFor(a.index) - size / 2));
      sq.setAttribute('y', String(plot.yFor(dimension, v) - size / 2));
      sq.setAttribute('width', String(size));
      sq.setAttribute('height', String(size));
      sq.setAttribute('fill', ANOMALY_TYPE_COLORS[a.type] ?? '#333333');
      const tip = document.createElementNS(SVG_NS, 'title');
      tip.textContent = `#${a.index} ${a.type} score ${a.score.toFixed(2)}`;
      sq.appendChild(tip);
      layer.appendChild(sq);
    }
  };

  decorate();
  return {
    plot,
    setDomain(domain: [number, number]) {
      plot.setDomain(domain);
      decorate();
    },
  };
}

export interface StackedBars {
  svg: SVGSVGElement;
  /** legend order (bottom of the stack first) */
  order: string[];
  sortToBaseline(type: string): void;
  setYZoom(factor: number): void;
}

/** Stacked anomaly-count bars; x stays fixed to the segment's global domain,
 * zoom applies to y only; clicking a bar reports its index range. */
export function renderStackedBars(
  container: HTMLElement,
  histogram: Histogram,
  segment: { from: number; to: number },
  onBarClick?: (range: [number, number]) => void,
): StackedBars {
  const width = 860;
  const height = 170;
  const margin = { left: 46, right: 8, top: 8, bottom: 20 };
  const svg = document.createElementNS(SVG_NS, 'svg') as SVGSVGElement;
  svg.setAttribute('class', 'histogram');
  svg.setAttribute('width', String(width));
  svg.setAttribute('height', String(height));
  container.appendChild(svg);

  let order = [...histogram.types];
  let yZoom = 1;

  const draw = () => {
    svg.textContent = '';
    const innerW = width - margin.left - margin.right;
    const innerH = height - margin.top - margin.bottom;
    const bins = histogram.bin_count;
    const totals = histogram.counts.map((row) => row.reduce((a, b) => a + b, 0));
    const maxTotal = Math.max(1e-9, ...totals);
    const yScale = (v: number) => (v / maxTotal) * innerH * yZoom;
    const span = segment.to - segment.from + 1;

    histogram.counts.forEach((row, b) => {
      let y0 = height - margin.bottom;
      const x = margin.left + (b / bins) * innerW + 1;
      const w = innerW / bins - 2;
      for (const type of order) {
        const v = row[histogram.types.indexOf(type)];
        if (v <= 0) continue;
        const h = yScale(v);
        const rect = document.createElementNS(SVG_NS, 'rect');
        rect.setAttribute('class', 'hist-bar');
        rect.setAttribute('data-bin', String(b));
        rect.setAttribute('data-type', type);
        rect.setAttribute('data-value', String(v));
        rect.setAttribute('x', String(x));
        rect.setAttribute('y', String(y0 - h));
        rect.setAttribute('width', String(Math.max(1, w)));
        rect.setAttribute('height', String(h));
        rect.setAttribute('fill', ANOMALY_TYPE_COLORS[type] ?? '#555555');
        rect.addEventListener('click', () => {
          const lo = Math.round(segment.from + (b / bins) * span);
          const hi = Math.round(segment.from + ((b + 1) / bins) * span) - 1;
          onBarClick?.([lo, Math.max(lo, hi)]);
        });
        svg.appendChild(rect);
        y0 -= h;
      }
    });

    const legend = document.createElementNS(SVG_NS, 'g');
    legend.setAttribute('class', 'legend');
    order.forEach((type, i) => {
      const item = document.createElementNS(SVG_NS, 'g');
      item.setAttribute('class', 'legend-item');
      item.setAttribute('data-type', type);
      const sw = document.createElementNS(SVG_NS, 'rect');
      sw.setAttribute('x', String(margin.left + i * 150));
      sw.setAttribute('y', String(height - 12));
      sw.setAttribute('width', '10');
      sw.setAttribute('height', '10');
      sw.setAttribute('fill', ANOMALY_TYPE_COLORS[type] ?? '#555555');
      const label = document.createElementNS(SVG_NS, 'text');
      label.setAttribute('x', String(margin.left + i * 150 + 14));
      label.setAttribute('y', String(height - 3));
      label.setAttribute('class', 'tick');
      label.textContent = type;
      item.appendChild(sw);
      item.appendChild(label);
      item.addEventListener('click', () => api.sortToBaseline(type));
      legend.appendChild(item);
    });
    svg.appendChild(legend);
  };

  const api: StackedBars = {
    svg,
    get order() {
      return order;
    },
    set order(next: string[]) {
      order = next;
    },
    sortToBaseline(type: string) {
      order = [type, ...order.filter((t) => t !== type)];
      draw();
    },
    setYZoom(factor: number) {
      yZoom = Math.min(20, Math.max(1, factor));
      draw();
    },
  };

  svg.addEventListener('wheel', (ev) => {
    ev.preventDefault();
    const e = ev as WheelEvent;
    api.setYZoom(yZoom * (e.deltaY < 0 ? 1.2 : 1 / 1.2)); // y-only zoom
  });

  draw();
  return api;
}
