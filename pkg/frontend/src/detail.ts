/** Detail windows (temporal | geographic), opened via session-based URLs. */

import { SegtreeClient } from './api.js';
import { GeoView } from './geoDetail.js';
import { renderEnrichedPlot, renderStackedBars } from './temporalDetail.js';
import type { DetailPayload, ForwardedEntry } from './types.js';

const params = new URLSearchParams(window.location.search);
const BASE_URL = params.get('base') ?? 'http://127.0.0.1:8765';
const VIEW = params.get('view') === 'geographic' ? 'geographic' : 'temporal';

function el<K extends keyof HTMLElementTagNameMap>(tag: K, cls?: string, text?: string) {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text) node.textContent = text;
  return node;
}

async function start(): Promise<void> {
  const session = params.get('session');
  if (!session) {
    document.body.textContent = 'missing ?session= in the URL';
    return;
  }
  const client = new SegtreeClient(BASE_URL, session);
  const app = document.getElementById('app') ?? document.body;

  const header = el('div', 'header');
  const segmentSelect = el('select', 'segment-select') as HTMLSelectElement;
  const dimensionSelect = el('select', 'dimension-select') as HTMLSelectElement;
  const refresh = el('button', '', 'refresh forwarded');
  header.append(segmentSelect, dimensionSelect, refresh);
  app.appendChild(header);
  const body = el('div', 'detail-body');
  app.appendChild(body);

  let forwardedList: ForwardedEntry[] = [];

  const loadForwarded = async () => {
    forwardedList = await client.forwarded(VIEW);
    segmentSelect.textContent = '';
    forwardedList.forEach((entry, i) => {
      const opt = el('option', '', `${entry.series} #${entry.node_id.slice(0, 8)}`) as HTMLOptionElement;
      opt.value = String(i);
      segmentSelect.appendChild(opt);
    });
  };

  const loadDimensions = async (series: string) => {
    const summaries = await client.listSeries();
    const summary = summaries.find((s) => s.name === series);
    dimensionSelect.textContent = '';
    for (const d of summary?.dimensions ?? []) {
      if (d.kind === 'categorical') continue;
      const opt = el('option', '', d.name) as HTMLOptionElement;
      opt.value = d.name;
      dimensionSelect.appendChild(opt);
    }
  };

  const show = async () => {
    const entry = forwardedList[Number(segmentSelect.value || '0')];
    if (!entry) return;
    await loadDimensions(entry.series);
    const dimension = dimensionSelect.value;
    body.textContent = '';
    if (VIEW === 'temporal') {
      await showTemporal(client, body, entry, dimension);
    } else {
      await showGeographic(client, body, entry);
    }
  };

  refresh.addEventListener('click', async () => {
    await loadForwarded();
    await show();
  });
  segmentSelect.addEventListener('change', show);
  dimensionSelect.addEventListener('change', show);

  await loadForwarded();
  await show();
}

export async function showTemporal(
  client: SegtreeClient,
  body: HTMLElement,
  entry: ForwardedEntry,
  dimension: string,
  expert = false,
): Promise<void> {
  const controls = el('div', 'detail-controls');
  const detectors = el('span', '', 'detectors: mad, lof ');
  const run = el('button', 'run-detection', 'detect anomalies');
  const normSelect = el('select') as HTMLSelectElement;
  for (const n of ['absolute', 'per_bin_percent', 'per_type_percent']) {
    const opt = el('option', '', n) as HTMLOptionElement;
    opt.value = n;
    normSelect.appendChild(opt);
  }
  const expertToggle = el('button', '', expert ? 'single plot' : 'expert mode');
  controls.append(detectors, run, normSelect, expertToggle);
  body.appendChild(controls);
  const plotHost = el('div', 'plot-host');
  body.appendChild(plotHost);

  const render = async (withDetectors: boolean) => {
    plotHost.textContent = '';
    const payload: DetailPayload = await client.getDetail(entry.series, entry.node_id, {
      detectors: withDetectors ? ['mad', 'lof'] : [],
      dimensions: [dimension],
      bins: 20,
      normalization: normSelect.value as 'absolute',
      motifLength: withDetectors ? 8 : undefined,
    });
    const enriched = renderEnrichedPlot(plotHost, payload, dimension, { localY: true });
    if (expert) {
      renderEnrichedPlot(plotHost, payload, dimension, { localY: true, height: 160 });
    }
    if (payload.histogram) {
      renderStackedBars(plotHost, payload.histogram, { from: payload.from, to: payload.to }, (range) =>
        enriched.setDomain(range),
      );
    }
  };

  run.addEventListener('click', () => render(true));
  expertToggle.addEventListener('click', () => showTemporal(client, body, entry, dimension, !expert));
  await render(false);
}

export async function showGeographic(
  client: SegtreeClient,
  body: HTMLElement,
  entry: ForwardedEntry,
): Promise<void> {
  const summaries = await client.listSeries();
  const summary = summaries.find((s) => s.name === entry.series);
  const lat = summary?.dimensions.find((d) => d.kind === 'latitude')?.name;
  const lon = summary?.dimensions.find((d) => d.kind === 'longitude')?.name;
  if (!lat || !lon) {
    body.appendChild(el('div', 'toast', 'series has no geographic dimensions'));
    return;
  }
  const info = el('div', 'record-details', 'hover the trajectory for record details');
  const copy = el('button', 'copy-coordinates', 'copy polygon coordinates');
  const clear = el('button', '', 'clear polygon');
  const controls = el('div', 'detail-controls');
  controls.append(copy, clear);
  body.appendChild(controls);
  const host = el('div', 'geo-host');
  body.appendChild(host);
  body.appendChild(info);

  const all = await client.getValues(entry.series, [lat, lon], 5000);
  const seg = await client.getDetail(entry.series, entry.node_id, { dimensions: [lat, lon] });
  const toPoints = (p: DetailPayload) =>
    p.indices.map((idx, i) => ({
      index: idx,
      lat: Number(p.values[lat]?.[i]),
      lon: Number(p.values[lon]?.[i]),
    }));

  const view = new GeoView(host, {
    tileUrl: params.get('tiles') ?? '',
    onSnap: (point) => {
      if (!point) return;
      const i = seg.indices.indexOf(point.index);
      const ts = i >= 0 ? new Date(seg.timestamps[i]).toISOString() : '';
      info.textContent = `record ${point.index} @ (${point.lat.toFixed(5)}, ${point.lon.toFixed(5)}) ${ts}`;
    },
  });
  view.setTrajectory(toPoints(all), toPoints(seg));

  copy.addEventListener('click', async () => {
    const text = view.copyText();
    try {
      await navigator.clipboard.writeText(text);
    } catch {
      window.prompt('polygon coordinates', text);
    }
  });
  clear.addEventListener('click', () => view.clearPolygon());
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  start().catch((err) => {
    document.body.appendChild(el('div', 'toast', String(err)));
  });
}
