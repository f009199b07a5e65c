/** Typed fetch client for the segtree service; all state lives server-side. */

import type {
  DetailPayload,
  ForwardedEntry,
  SeriesSummary,
  SiblingSimilarity,
  TreeJson,
} from './types.js';

export interface DetectorParams {
  detectors?: string[];
  dimensions?: string[];
  bins?: number;
  normalization?: 'absolute' | 'per_bin_percent' | 'per_type_percent';
  maxPoints?: number;
  motifLength?: number;
  motifTopK?: number;
  [key: string]: unknown;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class SegtreeClient {
  constructor(
    readonly baseUrl: string,
    public sessionId: string = '',
  ) {}

  private async request<T>(method: string, path: string, body?: BodyInit): Promise<T> {
    const resp = await fetch(this.baseUrl + path, { method, body });
    if (!resp.ok) {
      let code = 'error';
      let message = resp.statusText;
      try {
        const payload = (await resp.json()) as { code?: string; message?: string };
        code = payload.code ?? code;
        message = payload.message ?? message;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, code, message);
    }
    const text = await resp.text();
    return (text ? JSON.parse(text) : undefined) as T;
  }

  private async raw(path: string): Promise<string> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw new ApiError(resp.status, 'error', resp.statusText);
    return resp.text();
  }

  async createSession(): Promise<string> {
    const out = await this.request<{ session_id: string }>('POST', '/sessions');
    this.sessionId = out.session_id;
    return this.sessionId;
  }

  async sessionExists(id: string): Promise<boolean> {
    try {
      await this.request('GET', `/sessions/${id}`);
      return true;
    } catch {
      return false;
    }
  }

  uploadSeries(name: string, csv: string | Blob): Promise<SeriesSummary> {
    return this.request('POST', `/sessions/${this.sessionId}/series?name=${encodeURIComponent(name)}`, csv);
  }

  listSeries(): Promise<SeriesSummary[]> {
    return this.request('GET', `/sessions/${this.sessionId}/series`);
  }

  runQuery(series: string, queryJson: string): Promise<TreeJson> {
    return this.request('POST', `/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/query`, queryJson);
  }

  getTree(series: string): Promise<TreeJson> {
    return this.request('GET', `/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/tree`);
  }

  getValues(series: string, dimensions: string[], maxPoints = 2000): Promise<DetailPayload> {
    const dims = encodeURIComponent(dimensions.join(','));
    return this.request(
      'GET',
      `/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/values?dimensions=${dims}&max_points=${maxPoints}`,
    );
  }

  getSiblings(series: string, nodeId: string, dimensions: string[] = []): Promise<SiblingSimilarity[]> {
    const dims = encodeURIComponent(dimensions.join(','));
    return this.request(
      'GET',
      `/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/nodes/${nodeId}/siblings?dimensions=${dims}`,
    );
  }

  forward(series: string, nodeId: string, target: 'temporal' | 'geographic'): Promise<unknown> {
    return this.request(
      'POST',
      `/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/nodes/${nodeId}/forward?target=${target}`,
    );
  }

  forwarded(target: 'temporal' | 'geographic'): Promise<ForwardedEntry[]> {
    return this.request('GET', `/sessions/${this.sessionId}/forwarded?target=${target}`);
  }

  getDetail(series: string, nodeId: string, params: DetectorParams = {}): Promise<DetailPayload> {
    const q = new URLSearchParams();
    if (params.detectors?.length) q.set('detectors', params.detectors.join(','));
    if (params.dimensions?.length) q.set('dimensions', params.dimensions.join(','));
    if (params.bins !== undefined) q.set('bins', String(params.bins));
    if (params.normalization) q.set('normalization', params.normalization);
    if (params.maxPoints !== undefined) q.set('max_points', String(params.maxPoints));
    if (params.motifLength !== undefined) q.set('motif_length', String(params.motifLength));
    if (params.motifTopK !== undefined) q.set('motif_top_k', String(params.motifTopK));
    for (const key of Object.keys(params)) {
      if (key.startsWith('mad_') || key.startsWith('lof_') || key.startsWith('shesd_') || key.startsWith('io_tc_')) {
        q.set(key, String(params[key]));
      }
    }
    return this.request(
      'GET',
      `/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/nodes/${nodeId}/detail?${q.toString()}`,
    );
  }

  setBookmark(series: string, nodeId: string, bookmarked: boolean): Promise<unknown> {
    return this.request(
      'POST',
      `/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/nodes/${nodeId}/bookmark`,
      JSON.stringify({ bookmarked }),
    );
  }

  addLabel(series: string, nodeId: string, label: string): Promise<unknown> {
    return this.request(
      'POST',
      `/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/nodes/${nodeId}/label`,
      JSON.stringify({ label }),
    );
  }

  exportTreeCsv(series: string): Promise<string> {
    return this.raw(`/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/export?kind=tree_csv`);
  }

  exportQueryJson(series: string): Promise<string> {
    return this.raw(`/sessions/${this.sessionId}/series/${encodeURIComponent(series)}/export?kind=query_json`);
  }
}
