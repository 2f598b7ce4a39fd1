/**
 * Half-slice biaxiality heatmap.
 *
 * Draws every nodal beta sample as a grid cell, overlays the level curves
 * from the topology report, and marks the reported axis singularities (with
 * their signs) and the negatively uniaxial ring. Axes are isotropic so the
 * slice keeps its physical shape.
 */

import {
  BetaSample,
  LevelComponent,
  loadBetaSamples,
  loadTopologyReport,
} from './artifacts.js';
import {
  LinearScale,
  divergingColor,
  fmt,
  niceTicks,
  pathData,
  seriesColor,
  svgDocument,
  tag,
  textLabel,
  tickLabel,
} from './svg.js';

const PLOT_HEIGHT = 520;
const MARGIN = { left: 52, right: 150, top: 44, bottom: 46 };
const COLORBAR_STEPS = 64;

/** Smallest positive spacing between distinct sorted coordinates. */
function gridPitch(values: number[]): number {
  const unique = Array.from(new Set(values)).sort((a, b) => a - b);
  let pitch = Infinity;
  for (let i = 1; i < unique.length; i++) {
    pitch = Math.min(pitch, unique[i]! - unique[i - 1]!);
  }
  return Number.isFinite(pitch) ? pitch : 1;
}

function heatCells(
  samples: BetaSample[],
  sx: LinearScale,
  sy: LinearScale,
  dr: number,
  dz: number
): string {
  const w = Math.abs(sx.map(dr) - sx.map(0));
  const h = Math.abs(sy.map(dz) - sy.map(0));
  const cells = samples.map(s =>
    tag('rect', {
      x: fmt(sx.map(s.r - dr / 2)),
      y: fmt(sy.map(s.z + dz / 2)),
      width: fmt(w + 0.4),
      height: fmt(h + 0.4),
      fill: divergingColor(s.beta),
    })
  );
  return tag('g', { id: 'heatmap', 'shape-rendering': 'crispEdges' }, cells.join(''));
}

function levelCurvePath(
  component: LevelComponent,
  key: string,
  color: string,
  sx: LinearScale,
  sy: LinearScale
): string {
  const screen = component.points.map(
    ([r, z]): [number, number] => [sx.map(r), sy.map(z)]
  );
  return tag('path', {
    d: pathData(screen, component.closed),
    fill: 'none',
    stroke: color,
    'stroke-width': 1.3,
    'data-level': key,
    'data-kind': component.kind,
    class: 'level-curve',
  });
}

function signGlyph(cx: number, cy: number, sign: number): string {
  const arm = 3.2;
  const bars = [
    tag('line', { x1: fmt(cx - arm), y1: fmt(cy), x2: fmt(cx + arm), y2: fmt(cy) }),
  ];
  if (sign > 0) {
    bars.push(
      tag('line', { x1: fmt(cx), y1: fmt(cy - arm), x2: fmt(cx), y2: fmt(cy + arm) })
    );
  }
  return bars.join('');
}

function colorbar(x: number, y: number, height: number): string {
  const parts: string[] = [];
  const step = height / COLORBAR_STEPS;
  for (let i = 0; i < COLORBAR_STEPS; i++) {
    const beta = 1 - (2 * (i + 0.5)) / COLORBAR_STEPS;
    parts.push(
      tag('rect', {
        x: fmt(x),
        y: fmt(y + i * step),
        width: 14,
        height: fmt(step + 0.4),
        fill: divergingColor(beta),
      })
    );
  }
  parts.push(
    tag('rect', { x: fmt(x), y: fmt(y), width: 14, height: fmt(height), fill: 'none', stroke: '#333333' })
  );
  for (const [beta, label] of [[1, '+1'], [0, '0'], [-1, '-1']] as [number, string][]) {
    const ly = y + ((1 - beta) / 2) * height;
    parts.push(textLabel(x + 19, ly + 4, label));
  }
  parts.push(textLabel(x, y - 8, 'β'));
  return tag('g', { id: 'colorbar' }, parts.join(''));
}

/** Render the beta map of an analyzed run directory as an SVG string. */
export function renderBetaMap(runDir: string): string {
  const samples = loadBetaSamples(runDir);
  const report = loadTopologyReport(runDir);

  const dr = gridPitch(samples.map(s => s.r));
  const dz = gridPitch(samples.map(s => s.z));
  const rLo = Math.min(...samples.map(s => s.r)) - dr / 2;
  const rHi = Math.max(...samples.map(s => s.r)) + dr / 2;
  const zLo = Math.min(...samples.map(s => s.z)) - dz / 2;
  const zHi = Math.max(...samples.map(s => s.z)) + dz / 2;

  const plotWidth = (PLOT_HEIGHT * (rHi - rLo)) / (zHi - zLo);
  const width = MARGIN.left + plotWidth + MARGIN.right;
  const height = MARGIN.top + PLOT_HEIGHT + MARGIN.bottom;
  const sx = new LinearScale(rLo, rHi, MARGIN.left, MARGIN.left + plotWidth);
  const sy = new LinearScale(zLo, zHi, MARGIN.top + PLOT_HEIGHT, MARGIN.top);

  const body: string[] = [];
  body.push(heatCells(samples, sx, sy, dr, dz));

  const levelKeys = Object.keys(report.levels).sort((a, b) => Number(a) - Number(b));
  const curves: string[] = [];
  const legend: string[] = [];
  levelKeys.forEach((key, i) => {
    const color = seriesColor(i);
    for (const component of report.levels[key] ?? []) {
      curves.push(levelCurvePath(component, key, color, sx, sy));
    }
    const ly = MARGIN.top + 150 + i * 16;
    const lx = MARGIN.left + plotWidth + 64;
    legend.push(
      tag('line', { x1: fmt(lx), y1: fmt(ly - 3), x2: fmt(lx + 16), y2: fmt(ly - 3), stroke: color, 'stroke-width': 2 })
    );
    legend.push(textLabel(lx + 21, ly, `t = ${key}`));
  });
  body.push(tag('g', { id: 'level-curves' }, curves.join('')));
  if (legend.length > 0) {
    body.push(tag('g', { id: 'level-legend' }, legend.join('')));
  }

  const markers: string[] = [];
  for (const s of report.singularities) {
    const cx = sx.map(0);
    const cy = sy.map(s.z);
    markers.push(
      tag(
        'g',
        { 'data-sign': s.sign, class: 'singularity', stroke: '#000000', 'stroke-width': 1.4 },
        tag('circle', { cx: fmt(cx), cy: fmt(cy), r: 6, fill: '#ffffff' }) + signGlyph(cx, cy, s.sign)
      )
    );
  }
  body.push(tag('g', { id: 'singularities' }, markers.join('')));

  if (report.ring !== null) {
    const cx = sx.map(report.ring.r);
    const cy = sy.map(report.ring.z);
    body.push(
      tag(
        'g',
        { id: 'ring-marker' },
        tag('circle', { cx: fmt(cx), cy: fmt(cy), r: 7, fill: 'none', stroke: '#e67e22', 'stroke-width': 2 }) +
          tag('circle', { cx: fmt(cx), cy: fmt(cy), r: 1.6, fill: '#e67e22' }) +
          textLabel(cx - 11, cy + 4, `ring β = ${report.ring.beta.toFixed(3)}`, {
            'text-anchor': 'end',
            fill: '#a04000',
          })
      )
    );
  }

  const frame: string[] = [];
  frame.push(
    tag('rect', {
      x: fmt(MARGIN.left),
      y: fmt(MARGIN.top),
      width: fmt(plotWidth),
      height: fmt(PLOT_HEIGHT),
      fill: 'none',
      stroke: '#888888',
    })
  );
  for (const r of niceTicks(rLo, rHi, 4)) {
    const x = sx.map(r);
    const y = MARGIN.top + PLOT_HEIGHT;
    frame.push(tag('line', { x1: fmt(x), y1: fmt(y), x2: fmt(x), y2: fmt(y + 4), stroke: '#888888' }));
    frame.push(textLabel(x, y + 16, tickLabel(r), { 'text-anchor': 'middle' }));
  }
  for (const z of niceTicks(zLo, zHi, 6)) {
    const y = sy.map(z);
    frame.push(tag('line', { x1: fmt(MARGIN.left - 4), y1: fmt(y), x2: fmt(MARGIN.left), y2: fmt(y), stroke: '#888888' }));
    frame.push(textLabel(MARGIN.left - 7, y + 4, tickLabel(z), { 'text-anchor': 'end' }));
  }
  frame.push(textLabel(MARGIN.left + plotWidth / 2, height - 10, 'r', { 'text-anchor': 'middle' }));
  frame.push(textLabel(MARGIN.left - 30, MARGIN.top + PLOT_HEIGHT / 2, 'z'));
  body.push(tag('g', { id: 'axes' }, frame.join('')));

  body.push(
    textLabel(MARGIN.left, 24, `β half-slice — verdict: ${report.verdict}`, {
      'font-size': 13,
      'font-weight': 'bold',
    })
  );

  return svgDocument(Math.round(width), Math.round(height), body);
}
