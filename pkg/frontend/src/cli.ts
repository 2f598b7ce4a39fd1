/**
 * The `ldgviz` command line: batch figure generation from run directories.
 *
 * Subcommands mirror the figure kinds: beta_map, levels_3d, convergence.
 * `main(argv)` is directly callable in-process and returns the exit code
 * (0 ok, 1 unexpected failure, 2 bad usage, 3 missing artifacts), matching
 * the solver CLI's taxonomy.
 */

import { mkdirSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';
import yargs from 'yargs';

import { MissingArtifacts } from './artifacts.js';
import { renderBetaMap } from './beta-map.js';
import { renderConvergence } from './convergence.js';
import { renderLevels3d, UnknownLevel } from './levels-3d.js';

interface InOut {
  in: string;
  out: string;
}

function writeFigure(outDir: string, name: string, svg: string): void {
  mkdirSync(outDir, { recursive: true });
  const path = join(outDir, name);
  writeFileSync(path, svg, 'utf-8');
  console.log(path);
}

function exitCodeFor(err: unknown): number {
  if (err instanceof MissingArtifacts) {
    return 3;
  }
  if (err instanceof UnknownLevel) {
    return 2;
  }
  return 1;
}

export function main(argv: string[]): number {
  let code = 0;
  const attempt = (action: () => void) => {
    try {
      action();
    } catch (err) {
      console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
      code = exitCodeFor(err);
    }
  };

  const inOut = {
    in: { type: 'string' as const, demandOption: true, describe: 'run (or sweep) directory' },
    out: { type: 'string' as const, demandOption: true, describe: 'directory for the figure' },
  };

  yargs(argv)
    .scriptName('ldgviz')
    .usage('$0 <figure> --in <dir> --out <dir>')
    .command<InOut>(
      'beta_map',
      'half-slice β heatmap with level curves, signed singularities, ring',
      y => y.options(inOut),
      args => attempt(() => writeFigure(args.out, 'beta_map.svg', renderBetaMap(args.in)))
    )
    .command<InOut & { t: number }>(
      'levels_3d',
      'wireframe of the level-set components at t, revolved about the axis',
      y => y.options(inOut).option('t', {
        type: 'number',
        demandOption: true,
        describe: 'level value (one of the analyzed ladder)',
      }),
      args =>
        attempt(() => {
          const svg = renderLevels3d(args.in, args.t);
          if (svg === null) {
            console.log(`EmptyLevel: no components at t = ${args.t}; nothing to draw`);
            return;
          }
          writeFigure(args.out, `levels_t${args.t}.svg`, svg);
        })
    )
    .command<InOut>(
      'convergence',
      'energy/gradient history of a run, or the overlay of a sweep',
      y => y.options(inOut),
      args => attempt(() => writeFigure(args.out, 'convergence.svg', renderConvergence(args.in)))
    )
    .demandCommand(1, 'pick a figure: beta_map, levels_3d, or convergence')
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      if (err !== undefined && err !== null) {
        console.error(`error: ${err.message}`);
        code = exitCodeFor(err);
      } else {
        console.error(msg);
        code = 2;
      }
    })
    .parseSync();

  return code;
}
