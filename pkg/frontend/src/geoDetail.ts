/** Geographic detail window: raster tile map, trajectory polylines, heading
 * arrows, cursor snapping, and polygon drawing with copyable coordinates. */

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface GeoPoint {
  lat: number;
  lon: number;
  index: number;
}

/** Web-mercator projection to a continuous tile coordinate at `zoom`. */
export function lonLatToWorld(lat: number, lon: number, zoom: number): { x: number; y: number } {
  const scale = 2 ** zoom;
  const x = ((lon + 180) / 360) * scale;
  const rad = (lat * Math.PI) / 180;
  const y = ((1 - Math.log(Math.tan(rad) + 1 / Math.cos(rad)) / Math.PI) / 2) * scale;
  return { x, y };
}

/** Initial compass bearing in degrees from point a to point b. */
export function bearingDeg(a: { lat: number; lon: number }, b: { lat: number; lon: number }): number {
  const p1 = (a.lat * Math.PI) / 180;
  const p2 = (b.lat * Math.PI) / 180;
  const dl = ((b.lon - a.lon) * Math.PI) / 180;
  const y = Math.sin(dl) * Math.cos(p2);
  const x = Math.cos(p1) * Math.sin(p2) - Math.sin(p1) * Math.cos(p2) * Math.cos(dl);
  return ((Math.atan2(y, x) * 180) / Math.PI + 360) % 360;
}

/** Clipboard text for a drawn polygon; pastes straight into the query
 * builder's geographical-area vertex field. */
export function polygonClipboardText(vertices: [number, number][]): string {
  return JSON.stringify(vertices.map(([lat, lon]) => [round6(lat), round6(lon)]));
}

function round6(v: number): number {
  return Math.round(v * 1e6) / 1e6;
}

/** Zoom level fitting the lat/lon bounds into width x height pixels. */
export function fitZoom(
  latRange: [number, number],
  lonRange: [number, number],
  width: number,
  height: number,
): number {
  for (let z = 18; z >= 1; z--) {
    const a = lonLatToWorld(latRange[1], lonRange[0], z);
    const b = lonLatToWorld(latRange[0], lonRange[1], z);
    if ((b.x - a.x) * 256 <= width && (b.y - a.y) * 256 <= height) return z;
  }
  return 1;
}

export interface GeoViewOptions {
  width?: number;
  height?: number;
  /** e.g. https://tile.openstreetmap.org/{z}/{x}/{y}.png; empty renders no tiles */
  tileUrl?: string;
  lineWidth?: number;
  showTileLabels?: boolean;
  onSnap?: (point: GeoPoint | null) => void;
  onPolygonChange?: (vertices: [number, number][]) => void;
}

export class GeoView {
  readonly root: HTMLElement;
  readonly svg: SVGSVGElement;
  private zoom = 2;
  private origin = { x: 0, y: 0 };
  private all: GeoPoint[] = [];
  private focus: GeoPoint[] = [];
  private drawing: [number, number][] = [];
  private opts: Required<Pick<GeoViewOptions, 'width' | 'height'>> & GeoViewOptions;

  constructor(container: HTMLElement, options: GeoViewOptions = {}) {
    this.opts = { width: 720, height: 480, ...options };
    this.root = document.createElement('div');
    this.root.className = 'geo-view';
    this.root.style.width = `${this.opts.width}px`;
    this.root.style.height = `${this.opts.height}px`;
    container.appendChild(this.root);
    this.svg = document.createElementNS(SVG_NS, 'svg') as SVGSVGElement;
    this.svg.setAttribute('width', String(this.opts.width));
    this.svg.setAttribute('height', String(this.opts.height));
    this.svg.setAttribute('class', 'geo-overlay');
    this.root.appendChild(this.svg);
    this.svg.addEventListener('mousemove', (ev) => this.snap(ev as MouseEvent));
    this.svg.addEventListener('click', (ev) => this.addVertex(ev as MouseEvent));
    this.svg.addEventListener('dblclick', () => this.finishPolygon());
  }

  /** Show the full trajectory (pale, behind) and the focused segment. */
  setTrajectory(all: GeoPoint[], focus: GeoPoint[]): void {
    this.all = all.filter((p) => Number.isFinite(p.lat) && Number.isFinite(p.lon));
    this.focus = focus.filter((p) => Number.isFinite(p.lat) && Number.isFinite(p.lon));
    const target = this.focus.length ? this.focus : this.all;
    if (target.length) {
      const lats = target.map((p) => p.lat);
      const lons = target.map((p) => p.lon);
      const latRange: [number, number] = [Math.min(...lats), Math.max(...lats)];
      const lonRange: [number, number] = [Math.min(...lons), Math.max(...lons)];
      this.zoom = fitZoom(latRange, lonRange, this.opts.width * 0.8, this.opts.height * 0.8);
      const center = lonLatToWorld(
        (latRange[0] + latRange[1]) / 2,
        (lonRange[0] + lonRange[1]) / 2,
        this.zoom,
      );
      this.origin = {
        x: center.x - this.opts.width / 512,
        y: center.y - this.opts.height / 512,
      };
    }
    this.render();
  }

  project(lat: number, lon: number): { x: number; y: number } {
    const w = lonLatToWorld(lat, lon, this.zoom);
    return { x: (w.x - this.origin.x) * 256, y: (w.y - this.origin.y) * 256 };
  }

  private unproject(x: number, y: number): { lat: number; lon: number } {
    const scale = 2 ** this.zoom;
    const wx = this.origin.x + x / 256;
    const wy = this.origin.y + y / 256;
    const lon = (wx / scale) * 360 - 180;
    const n = Math.PI - (2 * Math.PI * wy) / scale;
    const lat = (180 / Math.PI) * Math.atan(0.5 * (Math.exp(n) - Math.exp(-n)));
    return { lat, lon };
  }

  render(): void {
    for (const img of Array.from(this.root.querySelectorAll('img.tile'))) img.remove();
    if (this.opts.tileUrl) {
      const tiles = 2 ** this.zoom;
      const x0 = Math.floor(this.origin.x);
      const y0 = Math.floor(this.origin.y);
      for (let tx = x0; tx * 256 < (this.origin.x + this.opts.width / 256 + 1) * 256; tx++) {
        for (let ty = y0; ty * 256 < (this.origin.y + this.opts.height / 256 + 1) * 256; ty++) {
          if (tx < 0 || ty < 0 || tx >= tiles || ty >= tiles) continue;
          const img = document.createElement('img');
          img.className = 'tile';
          img.src = this.opts.tileUrl
            .replace('{z}', String(this.zoom))
            .replace('{x}', String(tx))
            .replace('{y}', String(ty));
          img.style.left = `${(tx - this.origin.x) * 256}px`;
          img.style.top = `${(ty - this.origin.y) * 256}px`;
          this.root.insertBefore(img, this.svg);
        }
      }
    }

    this.svg.textContent = '';
    // full trajectory first: lower z-order and paler hue than the focus
    this.polyline(this.all, 'traj-all', '#9db7cc', (this.opts.lineWidth ?? 2) * 0.8);
    this.polyline(this.focus, 'traj-focus', '#1f4e9c', this.opts.lineWidth ?? 2.4);
    this.arrows(this.focus.length ? this.focus : this.all);
    this.drawPolygonLayer();
    const marker = document.createElementNS(SVG_NS, 'g');
    marker.setAttribute('class', 'snap-marker');
    this.svg.appendChild(marker);
  }

  private polyline(points: GeoPoint[], cls: string, stroke: string, width: number): void {
    if (points.length < 2) return;
    const path = points
      .map((p, i) => {
        const { x, y } = this.project(p.lat, p.lon);
        return `${i ? 'L' : 'M'}${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join('');
    const el = document.createElementNS(SVG_NS, 'path');
    el.setAttribute('class', cls);
    el.setAttribute('d', path);
    el.setAttribute('fill', 'none');
    el.setAttribute('stroke', stroke);
    el.setAttribute('stroke-width', String(width));
    this.svg.appendChild(el);
  }

  /** Equidistant heading arrows along the polyline (by projected distance). */
  private arrows(points: GeoPoint[]): void {
    if (points.length < 2) return;
    const spacing = 90;
    let walked = 0;
    for (let i = 1; i < points.length; i++) {
      const a = this.project(points[i - 1].lat, points[i - 1].lon);
      const b = this.project(points[i].lat, points[i].lon);
      walked += Math.hypot(b.x - a.x, b.y - a.y);
      if (walked < spacing) continue;
      walked = 0;
      const heading = bearingDeg(points[i - 1], points[i]);
      const arrow = document.createElementNS(SVG_NS, 'path');
      arrow.setAttribute('class', 'heading-arrow');
      arrow.setAttribute('d', 'M0,-6L4,4L0,2L-4,4Z');
      arrow.setAttribute('fill', '#1f4e9c');
      arrow.setAttribute('transform', `translate(${b.x.toFixed(1)},${b.y.toFixed(1)}) rotate(${heading.toFixed(1)})`);
      this.svg.appendChild(arrow);
    }
  }

  private snap(ev: MouseEvent): void {
    const pool = this.focus.length ? this.focus : this.all;
    if (!pool.length) return;
    let best: GeoPoint | null = null;
    let bestD = Infinity;
    for (const p of pool) {
      const { x, y } = this.project(p.lat, p.lon);
      const d = Math.hypot(x - ev.offsetX, y - ev.offsetY);
      if (d < bestD) {
        bestD = d;
        best = p;
      }
    }
    const marker = this.svg.querySelector('g.snap-marker');
    if (!marker) return;
    marker.textContent = '';
    if (best && bestD < 120) {
      const { x, y } = this.project(best.lat, best.lon);
      const arrow = document.createElementNS(SVG_NS, 'path');
      arrow.setAttribute('d', 'M0,-8L5,5L0,2L-5,5Z');
      arrow.setAttribute('fill', '#e8590c');
      arrow.setAttribute('transform', `translate(${x.toFixed(1)},${y.toFixed(1)})`);
      marker.appendChild(arrow);
      this.opts.onSnap?.(best);
    } else {
      this.opts.onSnap?.(null);
    }
  }

  // --- polygon drawing -------------------------------------------------

  private addVertex(ev: MouseEvent): void {
    const { lat, lon } = this.unproject(ev.offsetX, ev.offsetY);
    this.drawing.push([round6(lat), round6(lon)]);
    this.drawPolygonLayer();
    this.opts.onPolygonChange?.(this.drawing);
  }

  private finishPolygon(): void {
    if (this.drawing.length >= 3) this.opts.onPolygonChange?.(this.drawing);
  }

  clearPolygon(): void {
    this.drawing = [];
    this.drawPolygonLayer();
    this.opts.onPolygonChange?.(this.drawing);
  }

  get polygon(): [number, number][] {
    return [...this.drawing];
  }

  copyText(): string {
    return polygonClipboardText(this.drawing);
  }

  private drawPolygonLayer(): void {
    this.svg.querySelector('g.draw-layer')?.remove();
    const layer = document.createElementNS(SVG_NS, 'g');
    layer.setAttribute('class', 'draw-layer');
    if (this.drawing.length) {
      const path = this.drawing
        .map(([lat, lon], i) => {
          const { x, y } = this.project(lat, lon);
          return `${i ? 'L' : 'M'}${x.toFixed(1)},${y.toFixed(1)}`;
        })
        .join('');
      const el = document.createElementNS(SVG_NS, 'path');
      el.setAttribute('class', 'draw-polygon');
      el.setAttribute('d', path + (this.drawing.length >= 3 ? 'Z' : ''));
      el.setAttribute('fill', 'rgba(232, 89, 12, 0.15)');
      el.setAttribute('stroke', '#e8590c');
      layer.appendChild(el);
      for (const [lat, lon] of this.drawing) {
        const { x, y } = this.project(lat, lon);
        const dot = document.createElementNS(SVG_NS, 'circle');
        dot.setAttribute('cx', String(x));
        dot.setAttribute('cy', String(y));
        dot.setAttribute('r', '3');
        dot.setAttribute('fill', '#e8590c');
        layer.appendChild(dot);
      }
    }
    this.svg.appendChild(layer);
  }
}
