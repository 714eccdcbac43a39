export {
  CircuitHandle,
  CircuitStructureError,
  NnfParseError,
  loadCircuit,
  loadCircuitFromText,
  parseNnf,
} from './nnf.js';
export type { CircuitNode, NodeKind, ParsedNnf } from './nnf.js';
export {
  ZeroWmcError,
  entropy,
  entropyGradient,
  rowWeights,
  wmc,
  wmcGradient,
} from './queries.js';
export type { RowWeights } from './queries.js';
export {
  batchLoss,
  fullEntropy,
  nesyEntropy,
  semanticLoss,
} from './loss.js';
export type { BatchResult, EntropyKind, LossOptions, RowLoss } from './loss.js';
