/**
 * 3D wireframe of a revolved level set.
 *
 * Each component of the chosen level is a polyline in the (r, z) half-slice;
 * revolving it about the axis gives the actual surface in the ball. The
 * wireframe shows meridians (the polyline at a ring of azimuths) and
 * parallels (selected vertices swept into circles), orthographically
 * projected from a fixed oblique viewpoint. Components are colored by kind,
 * so a torus, a sphere and a boundary strip are distinguishable at a glance.
 */

import { loadTopologyReport, findLevelKey } from './artifacts.js';
import { fmt, pathData, svgDocument, tag, textLabel } from './svg.js';

const N_MERIDIANS = 24;
const N_CIRCLE_SEGMENTS = 48;
const MAX_PARALLELS = 21;
const YAW = 0.6;
const ELEVATION = 0.35;
const PLOT_SIZE = 520;
const MARGIN = { left: 40, right: 150, top: 48, bottom: 32 };

const KIND_COLORS: Record<string, string> = {
  closed: '#c0392b',
  axis_to_axis: '#2471a3',
  boundary_arc: '#1e8449',
};

/** The requested level value is not part of the topology report. */
export class UnknownLevel extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'UnknownLevel';
  }
}

function kindColor(kind: string): string {
  return KIND_COLORS[kind] ?? '#555555';
}

/** Orthographic projection of (x, y, z) for the fixed oblique viewpoint. */
function project(x: number, y: number, z: number): [number, number] {
  const sx = -x * Math.sin(YAW) + y * Math.cos(YAW);
  const up =
    -x * Math.sin(ELEVATION) * Math.cos(YAW) -
    y * Math.sin(ELEVATION) * Math.sin(YAW) +
    z * Math.cos(ELEVATION);
  return [sx, up];
}

function revolvePoint(r: number, z: number, phi: number): [number, number] {
  return project(r * Math.cos(phi), r * Math.sin(phi), z);
}

interface Wire {
  points: [number, number][];
  closed: boolean;
  kind: string;
  role: 'meridian' | 'parallel';
}

function componentWires(points: [number, number][], kind: string): Wire[] {
  const wires: Wire[] = [];
  for (let k = 0; k < N_MERIDIANS; k++) {
    const phi = (2 * Math.PI * k) / N_MERIDIANS;
    wires.push({
      points: points.map(([r, z]) => revolvePoint(r, z, phi)),
      closed: false,
      kind,
      role: 'meridian',
    });
  }
  const stride = Math.max(1, Math.ceil(points.length / MAX_PARALLELS));
  for (let i = 0; i < points.length; i += stride) {
    const [r, z] = points[i]!;
    if (r < 1e-6) {
      continue;
    }
    const circle: [number, number][] = [];
    for (let k = 0; k < N_CIRCLE_SEGMENTS; k++) {
      circle.push(revolvePoint(r, z, (2 * Math.PI * k) / N_CIRCLE_SEGMENTS));
    }
    wires.push({ points: circle, closed: true, kind, role: 'parallel' });
  }
  return wires;
}

/**
 * Render the revolved level set at level `t` as an SVG string.
 * Returns null when the level exists in the report but has no components.
 */
export function renderLevels3d(runDir: string, t: number): string | null {
  const report = loadTopologyReport(runDir);
  const key = findLevelKey(report, t);
  if (key === null) {
    const available = Object.keys(report.levels).join(', ');
    throw new UnknownLevel(`level t=${t} not in the report (available: ${available})`);
  }
  const components = report.levels[key] ?? [];
  if (components.length === 0) {
    return null;
  }

  const wires: Wire[] = [];
  let zMin = Infinity;
  let zMax = -Infinity;
  for (const component of components) {
    wires.push(...componentWires(component.points, component.kind));
    for (const [, z] of component.points) {
      zMin = Math.min(zMin, z);
      zMax = Math.max(zMax, z);
    }
  }
  const zPad = 0.08 * Math.max(zMax - zMin, 0.1);
  const axis: Wire = {
    points: [project(0, 0, zMin - zPad), project(0, 0, zMax + zPad)],
    closed: false,
    kind: 'axis',
    role: 'meridian',
  };

  let xLo = Infinity;
  let xHi = -Infinity;
  let yLo = Infinity;
  let yHi = -Infinity;
  for (const wire of [...wires, axis]) {
    for (const [x, y] of wire.points) {
      xLo = Math.min(xLo, x);
      xHi = Math.max(xHi, x);
      yLo = Math.min(yLo, y);
      yHi = Math.max(yHi, y);
    }
  }
  const scale = PLOT_SIZE / Math.max(xHi - xLo, yHi - yLo, 1e-12);
  const ox = MARGIN.left + (PLOT_SIZE - scale * (xHi - xLo)) / 2;
  const oy = MARGIN.top + (PLOT_SIZE - scale * (yHi - yLo)) / 2;
  const toScreen = ([x, y]: [number, number]): [number, number] => [
    ox + scale * (x - xLo),
    oy + scale * (yHi - y),
  ];

  const body: string[] = [];
  body.push(
    tag('path', {
      d: pathData(axis.points.map(toScreen), false),
      stroke: '#555555',
      'stroke-dasharray': '5 4',
      fill: 'none',
      id: 'revolution-axis',
    })
  );
  const curves = wires.map(wire =>
    tag('path', {
      d: pathData(wire.points.map(toScreen), wire.closed),
      fill: 'none',
      stroke: kindColor(wire.kind),
      'stroke-width': wire.role === 'parallel' ? 1.0 : 0.7,
      'stroke-opacity': wire.role === 'parallel' ? 0.85 : 0.45,
      'data-kind': wire.kind,
      'data-role': wire.role,
    })
  );
  body.push(tag('g', { id: 'wireframe' }, curves.join('')));

  const seen = new Set<string>();
  const legend: string[] = [];
  components.forEach(component => {
    const entry = `${component.kind} → ${component.revolved}`;
    if (seen.has(entry)) {
      return;
    }
    seen.add(entry);
    const ly = MARGIN.top + 12 + seen.size * 18;
    const lx = MARGIN.left + PLOT_SIZE + 16;
    legend.push(
      tag('line', {
        x1: fmt(lx),
        y1: fmt(ly - 4),
        x2: fmt(lx + 16),
        y2: fmt(ly - 4),
        stroke: kindColor(component.kind),
        'stroke-width': 2.5,
      })
    );
    legend.push(textLabel(lx + 21, ly, entry));
  });
  body.push(tag('g', { id: 'kind-legend' }, legend.join('')));

  body.push(
    textLabel(MARGIN.left, 26, `level set t = ${key}, revolved about the axis`, {
      'font-size': 13,
      'font-weight': 'bold',
    })
  );

  const width = MARGIN.left + PLOT_SIZE + MARGIN.right;
  const height = MARGIN.top + PLOT_SIZE + MARGIN.bottom;
  return svgDocument(width, height, body);
}
