/**
 * Convergence traces on a log-iteration axis.
 *
 * For a single run: the energy history (left axis, linear) and the projected
 * gradient norm (right axis, log), with an explicit annotation when the run
 * stopped without converging. For a sweep directory: the energy histories of
 * every member run overlaid, labelled by their run-directory names.
 */

import {
  HistoryRow,
  isSweepDir,
  loadEnergyHistory,
  loadRunRecord,
  sweepRunDirs,
} from './artifacts.js';
import {
  LinearScale,
  fmt,
  niceTicks,
  pathData,
  seriesColor,
  svgDocument,
  tag,
  textLabel,
  tickLabel,
} from './svg.js';

const WIDTH = 660;
const HEIGHT = 400;
const MARGIN = { left: 66, right: 76, top: 46, bottom: 48 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;
const MAX_POINTS_PER_SERIES = 2000;

interface Series {
  label: string;
  rows: HistoryRow[];
}

function thinned(rows: HistoryRow[]): HistoryRow[] {
  if (rows.length <= MAX_POINTS_PER_SERIES) {
    return rows;
  }
  const stride = Math.ceil(rows.length / MAX_POINTS_PER_SERIES);
  const out = rows.filter((_, i) => i % stride === 0);
  if (out[out.length - 1] !== rows[rows.length - 1]) {
    out.push(rows[rows.length - 1]!);
  }
  return out;
}

function logIter(iter: number): number {
  return Math.log10(iter + 1);
}

function pow10Label(k: number): string {
  return k < 4 ? String(Math.pow(10, k)) : `1e${k}`;
}

function seriesPath(
  rows: HistoryRow[],
  value: (row: HistoryRow) => number,
  sx: LinearScale,
  sy: LinearScale,
  attrs: Record<string, string | number>
): string {
  const points = rows.map(
    (row): [number, number] => [sx.map(logIter(row.iter)), sy.map(value(row))]
  );
  return tag('path', { d: pathData(points, false), fill: 'none', ...attrs });
}

function iterationAxis(sx: LinearScale, xMax: number): string {
  const parts: string[] = [];
  const y = MARGIN.top + PLOT_H;
  for (let k = 0; k <= Math.ceil(xMax); k++) {
    const x = sx.map(k);
    parts.push(tag('line', { x1: fmt(x), y1: fmt(y), x2: fmt(x), y2: fmt(y + 4), stroke: '#888888' }));
    parts.push(textLabel(x, y + 17, pow10Label(k), { 'text-anchor': 'middle' }));
  }
  parts.push(textLabel(MARGIN.left + PLOT_W / 2, HEIGHT - 10, 'iteration', { 'text-anchor': 'middle' }));
  return parts.join('');
}

function energyAxis(sy: LinearScale, lo: number, hi: number): string {
  const parts: string[] = [];
  for (const v of niceTicks(lo, hi, 5)) {
    const y = sy.map(v);
    parts.push(tag('line', { x1: fmt(MARGIN.left - 4), y1: fmt(y), x2: fmt(MARGIN.left), y2: fmt(y), stroke: '#888888' }));
    parts.push(textLabel(MARGIN.left - 7, y + 4, tickLabel(v), { 'text-anchor': 'end' }));
  }
  parts.push(textLabel(MARGIN.left - 40, MARGIN.top - 10, 'E'));
  return parts.join('');
}

function frame(): string {
  return tag('rect', {
    x: fmt(MARGIN.left),
    y: fmt(MARGIN.top),
    width: fmt(PLOT_W),
    height: fmt(PLOT_H),
    fill: 'none',
    stroke: '#888888',
  });
}

function energyDomain(series: Series[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const row of s.rows) {
      lo = Math.min(lo, row.energy);
      hi = Math.max(hi, row.energy);
    }
  }
  const pad = 0.05 * Math.max(hi - lo, 1e-12);
  return [lo - pad, hi + pad];
}

function renderSweepOverlay(dir: string): string {
  const series: Series[] = sweepRunDirs(dir).map(run => ({
    label: run.label,
    rows: thinned(loadEnergyHistory(run.path)),
  }));
  const xMax = Math.max(1, ...series.map(s => logIter(s.rows[s.rows.length - 1]?.iter ?? 0)));
  const [eLo, eHi] = energyDomain(series);
  const sx = new LinearScale(0, xMax, MARGIN.left, MARGIN.left + PLOT_W);
  const sy = new LinearScale(eLo, eHi, MARGIN.top + PLOT_H, MARGIN.top);

  const body: string[] = [frame()];
  const paths = series.map((s, i) =>
    seriesPath(s.rows, row => row.energy, sx, sy, {
      stroke: seriesColor(i),
      'stroke-width': 1.5,
      'data-label': s.label,
      class: 'energy-series',
    })
  );
  body.push(tag('g', { id: 'series' }, paths.join('')));

  const legend = series.map((s, i) => {
    const lx = MARGIN.left + PLOT_W + 10;
    const ly = MARGIN.top + 10 + i * 16;
    return (
      tag('line', { x1: fmt(lx), y1: fmt(ly - 4), x2: fmt(lx + 14), y2: fmt(ly - 4), stroke: seriesColor(i), 'stroke-width': 2 }) +
      textLabel(lx + 19, ly, s.label)
    );
  });
  body.push(tag('g', { id: 'legend' }, legend.join('')));
  body.push(tag('g', { id: 'axes' }, iterationAxis(sx, xMax) + energyAxis(sy, eLo, eHi)));
  body.push(
    textLabel(MARGIN.left, 24, `energy histories — ${series.length} runs`, {
      'font-size': 13,
      'font-weight': 'bold',
    })
  );
  return svgDocument(WIDTH, HEIGHT, body);
}

function renderSingleRun(dir: string): string {
  const record = loadRunRecord(dir);
  const rows = thinned(loadEnergyHistory(dir));
  const xMax = Math.max(1, logIter(rows[rows.length - 1]?.iter ?? 0));
  const [eLo, eHi] = energyDomain([{ label: '', rows }]);
  const sx = new LinearScale(0, xMax, MARGIN.left, MARGIN.left + PLOT_W);
  const sy = new LinearScale(eLo, eHi, MARGIN.top + PLOT_H, MARGIN.top);

  const gradValues = rows.map(row => row.grad).filter(g => g > 0);
  const gLo = Math.log10(Math.min(...gradValues));
  const gHi = Math.log10(Math.max(...gradValues));
  const sg = new LinearScale(gLo, gHi === gLo ? gLo + 1 : gHi, MARGIN.top + PLOT_H, MARGIN.top);

  const body: string[] = [frame()];
  body.push(
    tag(
      'g',
      { id: 'series' },
      seriesPath(rows.filter(row => row.grad > 0), row => Math.log10(row.grad), sx, sg, {
        stroke: '#aaaaaa',
        'stroke-width': 1,
        class: 'grad-series',
      }) +
        seriesPath(rows, row => row.energy, sx, sy, {
          stroke: seriesColor(0),
          'stroke-width': 1.7,
          class: 'energy-series',
        })
    )
  );

  const gradAxis: string[] = [];
  const stride = Math.max(1, Math.ceil((gHi - gLo) / 6));
  for (let k = Math.ceil(gLo); k <= gHi + 1e-9; k += stride) {
    const y = sg.map(k);
    const x = MARGIN.left + PLOT_W;
    gradAxis.push(tag('line', { x1: fmt(x), y1: fmt(y), x2: fmt(x + 4), y2: fmt(y), stroke: '#aaaaaa' }));
    gradAxis.push(textLabel(x + 7, y + 4, `1e${k}`, { fill: '#888888' }));
  }
  gradAxis.push(textLabel(MARGIN.left + PLOT_W + 8, MARGIN.top - 10, '|grad|', { fill: '#888888' }));
  body.push(tag('g', { id: 'grad-axis' }, gradAxis.join('')));
  body.push(tag('g', { id: 'axes' }, iterationAxis(sx, xMax) + energyAxis(sy, eLo, eHi)));

  const status = record.converged
    ? `converged, E = ${record.energy.toFixed(6)}`
    : `E = ${record.energy.toFixed(6)}`;
  body.push(
    textLabel(MARGIN.left, 24, `energy history — ${status}`, {
      'font-size': 13,
      'font-weight': 'bold',
    })
  );
  if (!record.converged) {
    const last = rows[rows.length - 1];
    if (last !== undefined) {
      body.push(
        tag('circle', {
          cx: fmt(sx.map(logIter(last.iter))),
          cy: fmt(sy.map(last.energy)),
          r: 4,
          fill: 'none',
          stroke: '#c0392b',
          'stroke-width': 1.6,
        })
      );
    }
    body.push(
      textLabel(
        MARGIN.left + PLOT_W,
        MARGIN.top - 10,
        `not converged after ${record.iterations} iterations`,
        { fill: '#c0392b', 'font-weight': 'bold', 'text-anchor': 'end', id: 'not-converged-note' }
      )
    );
  }
  return svgDocument(WIDTH, HEIGHT, body);
}

/**
 * Render the convergence figure for a run directory, or the multi-run
 * overlay when the directory is a sweep.
 */
export function renderConvergence(dir: string): string {
  return isSweepDir(dir) ? renderSweepOverlay(dir) : renderSingleRun(dir);
}
