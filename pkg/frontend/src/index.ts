export {
  MissingArtifacts,
  loadBetaSamples,
  loadEnergyHistory,
  loadRunRecord,
  loadSweepTable,
  loadTopologyReport,
  findLevelKey,
  isSweepDir,
  sweepRunDirs,
} from './artifacts.js';
export type {
  AxisSingularity,
  BetaSample,
  HistoryRow,
  LevelComponent,
  RingPoint,
  RunRecord,
  SweepRow,
  TopologyReport,
} from './artifacts.js';
export { renderBetaMap } from './beta-map.js';
export { renderConvergence } from './convergence.js';
export { renderLevels3d, UnknownLevel } from './levels-3d.js';
export { main } from './cli.js';
