/**
 * Readers for the solver's file contracts.
 *
 * A run directory is produced by `ldglab minimize` (run.json, field.csv,
 * energy_history.csv) and extended by `ldglab analyze` (beta.csv,
 * topology.json). A sweep directory is produced by `ldglab sweep` (sweep.csv
 * plus one run directory per parameter value). Everything here is read-only:
 * no physics is ever recomputed from the field.
 */

import { existsSync, readFileSync, readdirSync, statSync } from 'node:fs';
import { join } from 'node:path';

/** A required artifact file is absent or unreadable. */
export class MissingArtifacts extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'MissingArtifacts';
  }
}

/** A point defect on the symmetry axis, with its topological sign. */
export interface AxisSingularity {
  z: number;
  sign: number;
}

/** Location and depth of the detected negatively uniaxial ring. */
export interface RingPoint {
  r: number;
  z: number;
  beta: number;
}

/** One connected level-curve component in the half-slice. */
export interface LevelComponent {
  /** 'closed' | 'axis_to_axis' | 'boundary_arc' in practice. */
  kind: string;
  /** Name of the surface obtained by revolving the curve about the axis. */
  revolved: string;
  closed: boolean;
  /** Polyline vertices as [r, z] pairs. */
  points: [number, number][];
  axis_ids: number[];
  axis_z: number[];
}

/** topology.json: the biaxiality-topology report of an analyzed run. */
export interface TopologyReport {
  schema: number;
  verdict: string;
  singularities: AxisSingularity[];
  ring: RingPoint | null;
  linking: boolean;
  hp1: boolean;
  hp1_value: number;
  hp3: boolean;
  hp3_degree: number;
  nudges: Record<string, number>;
  /** Level value (as its decimal string) -> components at that level. */
  levels: Record<string, LevelComponent[]>;
}

/** run.json: the convergence record of a minimization. */
export interface RunRecord {
  schema: number;
  converged: boolean;
  iterations: number;
  energy: number;
  energy_history: number[];
  grad_history: number[];
  singularities: AxisSingularity[];
  config_echo: string;
}

/** One nodal biaxiality sample from beta.csv. */
export interface BetaSample {
  r: number;
  z: number;
  beta: number;
}

/** One per-iteration row from energy_history.csv. */
export interface HistoryRow {
  iter: number;
  energy: number;
  grad: number;
}

/** One row of sweep.csv; `value` keeps the verbatim spelling for labels. */
export interface SweepRow {
  value: string;
  energy: number;
  n_singularities: number;
  ring: boolean;
  verdict: string;
  status: string;
}

function requireFile(dir: string, name: string): string {
  const path = join(dir, name);
  if (!existsSync(path)) {
    throw new MissingArtifacts(`${name} not found in ${dir}`);
  }
  return readFileSync(path, 'utf-8');
}

/**
 * Split a strictly numeric CSV into rows, enforcing the expected header.
 * The solver never quotes or escapes, so plain splitting is exact.
 */
function parseNumericCsv(text: string, header: string, where: string): number[][] {
  const lines = text.split('\n').filter(line => line.length > 0);
  if (lines[0] !== header) {
    throw new MissingArtifacts(`${where}: expected header "${header}", got "${lines[0] ?? ''}"`);
  }
  return lines.slice(1).map(line => line.split(',').map(Number));
}

export function loadRunRecord(dir: string): RunRecord {
  return JSON.parse(requireFile(dir, 'run.json')) as RunRecord;
}

export function loadTopologyReport(dir: string): TopologyReport {
  return JSON.parse(requireFile(dir, 'topology.json')) as TopologyReport;
}

export function loadBetaSamples(dir: string): BetaSample[] {
  const rows = parseNumericCsv(requireFile(dir, 'beta.csv'), 'r,z,beta', 'beta.csv');
  return rows.map(([r, z, beta]) => ({ r: r!, z: z!, beta: beta! }));
}

export function loadEnergyHistory(dir: string): HistoryRow[] {
  const rows = parseNumericCsv(
    requireFile(dir, 'energy_history.csv'),
    'iter,energy,grad',
    'energy_history.csv'
  );
  return rows.map(([iter, energy, grad]) => ({ iter: iter!, energy: energy!, grad: grad! }));
}

export function loadSweepTable(dir: string): SweepRow[] {
  const lines = requireFile(dir, 'sweep.csv').split('\n').filter(line => line.length > 0);
  const header = 'value,energy,n_singularities,ring,verdict,status';
  if (lines[0] !== header) {
    throw new MissingArtifacts(`sweep.csv: expected header "${header}", got "${lines[0] ?? ''}"`);
  }
  return lines.slice(1).map(line => {
    const [value, energy, nSing, ring, verdict, status] = line.split(',');
    return {
      value: value ?? '',
      energy: Number(energy),
      n_singularities: Number(nSing),
      ring: ring === 'true',
      verdict: verdict ?? '',
      status: status ?? '',
    };
  });
}

export function isSweepDir(dir: string): boolean {
  return existsSync(join(dir, 'sweep.csv'));
}

/** Run subdirectories of a sweep, in the order sweep.csv lists their values. */
export function sweepRunDirs(dir: string): { label: string; path: string }[] {
  const entries = readdirSync(dir)
    .filter(name => statSync(join(dir, name)).isDirectory())
    .filter(name => existsSync(join(dir, name, 'run.json')));
  const byValue = (name: string) => name.slice(name.lastIndexOf('_') + 1);
  const order = loadSweepTable(dir).map(row => row.value);
  entries.sort((a, b) => {
    const ia = order.indexOf(byValue(a));
    const ib = order.indexOf(byValue(b));
    return (ia === -1 ? order.length : ia) - (ib === -1 ? order.length : ib);
  });
  return entries.map(name => ({ label: name, path: join(dir, name) }));
}

/**
 * Resolve a requested level value against the report's level keys.
 * Returns the canonical key, or null if the report has no such level.
 */
export function findLevelKey(report: TopologyReport, t: number): string | null {
  for (const key of Object.keys(report.levels)) {
    if (Math.abs(Number(key) - t) <= 1e-9) {
      return key;
    }
  }
  return null;
}
