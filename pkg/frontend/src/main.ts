/** Main window: series selection, query building, icicle + linked plots. */

import { SegtreeClient } from './api.js';
import { BuilderDialog } from './builderUi.js';
import { IcicleView } from './icicle.js';
import { nodeAtRecord } from './layout.js';
import { renderLinePlot, type LinePlot } from './plots.js';
import type { DetailPayload, SeriesSummary, TreeJson, TreeNode } from './types.js';

const BASE_URL = (window as unknown as { SEGTREE_URL?: string }).SEGTREE_URL ?? 'http://127.0.0.1:8765';

function el<K extends keyof HTMLElementTagNameMap>(tag: K, cls?: string, text?: string) {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text) node.textContent = text;
  return node;
}

function toast(message: string): void {
  const t = el('div', 'toast', message);
  document.body.appendChild(t);
  setTimeout(() => t.remove(), 4000);
}

async function start(): Promise<void> {
  const client = new SegtreeClient(BASE_URL);
  const params = new URLSearchParams(window.location.search);
  const existing = params.get('session');
  if (existing && (await client.sessionExists(existing))) {
    client.sessionId = existing;
  } else {
    await client.createSession();
    params.set('session', client.sessionId);
    history.replaceState(null, '', `?${params.toString()}`);
  }

  const app = document.getElementById('app') ?? document.body;
  const header = el('div', 'header');
  const uploadInput = el('input') as HTMLInputElement;
  uploadInput.type = 'file';
  uploadInput.accept = '.csv';
  const seriesSelect = el('select', 'series-select') as HTMLSelectElement;
  const links = el('span', 'window-links');
  const temporalLink = el('a', '', 'temporal window') as HTMLAnchorElement;
  temporalLink.target = '_blank';
  const geoLink = el('a', '', 'geographic window') as HTMLAnchorElement;
  geoLink.target = '_blank';
  links.appendChild(temporalLink);
  links.appendChild(geoLink);
  const exportTree = el('button', '', 'export tree csv');
  const exportQuery = el('button', '', 'export query json');
  header.append(uploadInput, seriesSelect, exportTree, exportQuery, links);
  app.appendChild(header);

  const builderHost = el('div', 'builder-host');
  app.appendChild(builderHost);
  const icicleHost = el('div', 'icicle-host');
  app.appendChild(icicleHost);
  const plotHost = el('div', 'plot-host');
  const multiHost = el('div', 'plot-host');
  app.appendChild(plotHost);
  app.appendChild(multiHost);

  let summaries: SeriesSummary[] = [];
  let activeSeries = '';
  let tree: TreeJson | null = null;
  let uniPlot: LinePlot | null = null;
  let multiPlot: LinePlot | null = null;
  let payload: DetailPayload | null = null;
  let hoverToken = 0;

  const updateLinks = () => {
    temporalLink.href = `detail.html?session=${client.sessionId}&view=temporal&base=${encodeURIComponent(BASE_URL)}`;
    geoLink.href = `detail.html?session=${client.sessionId}&view=geographic&base=${encodeURIComponent(BASE_URL)}`;
  };
  updateLinks();

  const icicle = new IcicleView(icicleHost, { xMin: 0, xMax: 980 }, {
    onHover: async (node) => {
      if (!node || !tree) {
        icicle.clearSiblingColors();
        uniPlot?.setCues([]);
        return;
      }
      // visual cues: hovered interval plus its child boundaries
      const cues = [node.from, node.to, ...node.children.flatMap((c) => [c.from])];
      uniPlot?.setCues(cues);
      multiPlot?.setCues(cues);
      const token = ++hoverToken;
      try {
        const sims = await client.getSiblings(activeSeries, node.id);
        if (token !== hoverToken) return; // a newer hover superseded this one
        icicle.applySiblingColors(new Map(sims.map((s) => [s.node_id, s.color_position])));
      } catch (err) {
        toast(String(err));
      }
    },
    onDoubleClick: (node) => {
      uniPlot?.setDomain([node.from, node.to]);
      multiPlot?.setDomain([node.from, node.to]);
    },
    onForward: async (node) => {
      try {
        await client.forward(activeSeries, node.id, 'temporal');
        await client.forward(activeSeries, node.id, 'geographic');
        toast(`forwarded ${node.from}-${node.to} to the detail windows`);
      } catch (err) {
        toast(String(err));
      }
    },
    onBookmarkToggle: async (node: TreeNode) => {
      try {
        await client.setBookmark(activeSeries, node.id, !node.bookmarked);
        tree = await client.getTree(activeSeries);
        icicle.setTree(tree);
      } catch (err) {
        toast(String(err));
      }
    },
    onLabelRequest: async (node: TreeNode) => {
      const text = window.prompt('label for this segment');
      if (text) {
        await client.addLabel(activeSeries, node.id, text);
        tree = await client.getTree(activeSeries);
        icicle.setTree(tree);
      }
    },
  });

  const builder = new BuilderDialog(builderHost, {
    onSubmit: async (queryJson) => {
      try {
        tree = await client.runQuery(activeSeries, queryJson);
        icicle.setTree(tree);
        for (const w of tree.warnings) toast(`level ${w.level}: ${w.message}`);
      } catch (err) {
        toast(String(err));
      }
    },
  });

  const refreshSeries = async () => {
    summaries = await client.listSeries();
    seriesSelect.textContent = '';
    for (const s of summaries) {
      const opt = el('option', '', `${s.name} (${s.n} records)`) as HTMLOptionElement;
      opt.value = s.name;
      seriesSelect.appendChild(opt);
    }
    if (!activeSeries && summaries.length) {
      activeSeries = summaries[0].name;
    }
    seriesSelect.value = activeSeries;
  };

  const loadPlots = async () => {
    if (!activeSeries) return;
    const summary = summaries.find((s) => s.name === activeSeries);
    if (!summary) return;
    builder.setDimensions(summary.dimensions);
    const numeric = summary.dimensions.filter((d) => d.kind !== 'categorical').map((d) => d.name);
    payload = await client.getValues(activeSeries, numeric);
    plotHost.textContent = '';
    multiHost.textContent = '';
    // univariate plot of the first numeric dimension, multivariate context below
    uniPlot = renderLinePlot(plotHost, payload, [numeric[0]], {
      localY: false,
      onHoverIndex: (idx) => {
        if (idx !== null && tree) icicle.highlightSubtree(nodeAtRecord(tree, idx).id);
        else icicle.clearHighlight();
      },
    });
    multiPlot = renderLinePlot(multiHost, payload, numeric, { localY: true, height: 140 });
  };

  uploadInput.addEventListener('change', async () => {
    const file = uploadInput.files?.[0];
    if (!file) return;
    try {
      const summary = await client.uploadSeries(file.name.replace(/\.csv$/, ''), file);
      activeSeries = summary.name;
      await refreshSeries();
      await loadPlots();
      toast(`loaded ${summary.name}: ${summary.n} records`);
    } catch (err) {
      toast(String(err));
    }
  });

  seriesSelect.addEventListener('change', async () => {
    activeSeries = seriesSelect.value;
    await loadPlots();
    try {
      tree = await client.getTree(activeSeries);
      icicle.setTree(tree);
    } catch {
      tree = null;
    }
  });

  exportTree.addEventListener('click', async () => {
    try {
      download(`${activeSeries}-tree.csv`, await client.exportTreeCsv(activeSeries));
    } catch (err) {
      toast(String(err));
    }
  });
  exportQuery.addEventListener('click', async () => {
    try {
      download(`${activeSeries}-query.json`, await client.exportQueryJson(activeSeries));
    } catch (err) {
      toast(String(err));
    }
  });

  await refreshSeries();
  await loadPlots();
}

function download(name: string, text: string): void {
  const a = document.createElement('a');
  a.href = URL.createObjectURL(new Blob([text]));
  a.download = name;
  a.click();
}

start().catch((err) => toast(String(err)));
