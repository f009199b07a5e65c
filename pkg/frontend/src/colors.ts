/** Color ramps: diverging blue-white-red guidance scale and sequential reds. */

/** ColorBrewer RdBu (11 classes) reversed: 0 = pattern blue, 1 = anomaly red. */
const DIVERGING_STOPS = [
  '#053061', '#2166ac', '#4393c3', '#92c5de', '#d1e5f0', '#f7f7f7',
  '#fddbc7', '#f4a582', '#d6604d', '#b2182b', '#67001f',
];

/** ColorBrewer Reds (9 classes) for the anomaly-density rectangles. */
const REDS_STOPS = [
  '#fff5f0', '#fee0d2', '#fcbba1', '#fc9272', '#fb6a4a',
  '#ef3b2c', '#cb181d', '#a50f15', '#67000d',
];

/** Categorical fill per anomaly type (matches the CLI report palette). */
export const ANOMALY_TYPE_COLORS: Record<string, string> = {
  lof: '#1b9e77',
  mad_global: '#d95f02',
  shesd: '#7570b3',
  innovative_outlier: '#e7298a',
  temporary_change: '#66a61e',
};

function hexToRgb(hex: string): [number, number, number] {
  return [
    parseInt(hex.slice(1, 3), 16),
    parseInt(hex.slice(3, 5), 16),
    parseInt(hex.slice(5, 7), 16),
  ];
}

function rgbToHex(rgb: [number, number, number]): string {
  const c = (v: number) => Math.round(Math.min(255, Math.max(0, v))).toString(16).padStart(2, '0');
  return `#${c(rgb[0])}${c(rgb[1])}${c(rgb[2])}`;
}

function sample(stops: string[], t: number): string {
  const x = Math.min(1, Math.max(0, t)) * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(x));
  const f = x - i;
  const a = hexToRgb(stops[i]);
  const b = hexToRgb(stops[i + 1]);
  return rgbToHex([a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]), a[2] + f * (b[2] - a[2])]);
}

/** Diverging fill for a sibling color position in [0, 1]; 0.5 is neutral. */
export function divergingColor(position: number): string {
  return sample(DIVERGING_STOPS, position);
}

/** Sequential red fill for an overlay count fraction in [0, 1]. */
export function redsColor(fraction: number): string {
  return sample(REDS_STOPS, fraction);
}

export const NEUTRAL_FILL = '#c9d4dc';
export const FADED_OPACITY = 0.25;
export const HIGHLIGHT_STROKE = '#1a9850';
