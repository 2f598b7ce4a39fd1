/**
 * Minimal SVG assembly for batch figures.
 *
 * Figures are plain vector files built from strings: no DOM, no canvas, no
 * clocks. Identical inputs therefore produce byte-identical output, which is
 * the reproducibility contract for every renderer in this package.
 */

/** Fixed-precision coordinate, trimmed so output stays compact and stable. */
export function fmt(x: number): string {
  const s = x.toFixed(2);
  return s === '-0.00' ? '0.00' : s;
}

export function tag(name: string, attrs: Record<string, string | number>, body = ''): string {
  const parts = Object.entries(attrs).map(([key, value]) => `${key}="${value}"`);
  const open = parts.length > 0 ? `<${name} ${parts.join(' ')}` : `<${name}`;
  return body === '' ? `${open}/>` : `${open}>${body}</${name}>`;
}

export function svgDocument(width: number, height: number, body: string[]): string {
  const head =
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif">`;
  const background = tag('rect', { x: 0, y: 0, width, height, fill: '#ffffff' });
  return [head, background, ...body, '</svg>', ''].join('\n');
}

export function pathData(points: [number, number][], closed: boolean): string {
  const steps = points.map(([x, y], i) => `${i === 0 ? 'M' : 'L'}${fmt(x)} ${fmt(y)}`);
  return steps.join('') + (closed ? 'Z' : '');
}

export function textLabel(
  x: number,
  y: number,
  content: string,
  attrs: Record<string, string | number> = {}
): string {
  return tag('text', { x: fmt(x), y: fmt(y), 'font-size': 11, fill: '#333333', ...attrs }, content);
}

/** Affine map from a data interval onto a screen interval. */
export class LinearScale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number
  ) {}

  map(x: number): number {
    const span = this.d1 - this.d0;
    const t = span === 0 ? 0.5 : (x - this.d0) / span;
    return this.r0 + t * (this.r1 - this.r0);
  }
}

/** Round tick positions covering [lo, hi] with a 1/2/5 step. */
export function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const raw = (hi - lo) / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm >= 5 ? 10 : norm >= 2 ? 5 : norm >= 1 ? 2 : 1) * mag;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

/** Compact label for a tick value (trims float-noise from step arithmetic). */
export function tickLabel(v: number): string {
  return String(Number(v.toPrecision(10)));
}

const DIVERGING_STOPS: [number, [number, number, number]][] = [
  [-1.0, [33, 102, 172]],
  [-0.5, [146, 197, 222]],
  [0.0, [247, 247, 247]],
  [0.5, [244, 165, 130]],
  [1.0, [178, 24, 43]],
];

/** Blue-white-red map for biaxiality values in [-1, 1]. */
export function divergingColor(beta: number): string {
  const x = Math.max(-1, Math.min(1, beta));
  for (let i = 1; i < DIVERGING_STOPS.length; i++) {
    const [x1, c1] = DIVERGING_STOPS[i]!;
    if (x <= x1) {
      const [x0, c0] = DIVERGING_STOPS[i - 1]!;
      const t = (x - x0) / (x1 - x0);
      const mix = c0.map((a, k) => Math.round(a + t * (c1[k]! - a)));
      return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
    }
  }
  const last = DIVERGING_STOPS[DIVERGING_STOPS.length - 1]![1];
  return `rgb(${last[0]},${last[1]},${last[2]})`;
}

/** Distinguishable stroke colors for overlaid curves, cycled by index. */
export const SERIES_COLORS = [
  '#1f77b4',
  '#d62728',
  '#2ca02c',
  '#9467bd',
  '#8c564b',
  '#e377c2',
  '#17becf',
];

export function seriesColor(index: number): string {
  return SERIES_COLORS[index % SERIES_COLORS.length]!;
}
