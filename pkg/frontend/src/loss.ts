/**
 * Batched loss evaluation on a loaded circuit.
 *
 * Per row: wSemantic * (-ln wmc) + wEntropy * entropy, where the entropy
 * term is either the constraint-conditioned entropy ('nesy') or the
 * unconditioned factorized entropy ('full'). Rows whose constraint
 * probability is zero (and rows that fail validation) are masked in the
 * result instead of raising, so one bad row cannot sink the batch.
 */

import { CircuitHandle } from './nnf.js';
import {
  ZeroWmcError,
  entropy,
  entropyGradient,
  rowWeights,
  wmc,
  wmcGradient,
} from './queries.js';

export type EntropyKind = 'nesy' | 'full';

export interface LossOptions {
  wSemantic?: number;
  wEntropy?: number;
  entropyKind?: EntropyKind;
}

export interface RowLoss {
  value: number;
  grad: Float64Array;
}

/** -ln wmc and its gradient; throws ZeroWmcError on zero-mass rows. */
export function semanticLoss(handle: CircuitHandle, p: ArrayLike<number>): RowLoss {
  const value = wmc(handle, p);
  if (value <= 0) {
    throw new ZeroWmcError('semantic loss undefined: constraint probability is zero');
  }
  const g = wmcGradient(handle, p);
  const grad = new Float64Array(handle.numVars);
  for (let j = 0; j < grad.length; j++) grad[j] = -g[j] / value;
  return { value: -Math.log(value), grad };
}

/** Constraint-conditioned entropy and its gradient. */
export function nesyEntropy(handle: CircuitHandle, p: ArrayLike<number>): RowLoss {
  return { value: entropy(handle, p), grad: entropyGradient(handle, p) };
}

/** Unconditioned factorized entropy: the circuit only supplies numVars.
 * At p in {0,1} the one-sided slope is infinite. */
export function fullEntropy(handle: CircuitHandle, p: ArrayLike<number>): RowLoss {
  const w = rowWeights(p, handle.numVars);
  let value = 0;
  const grad = new Float64Array(handle.numVars);
  for (let v = 1; v <= handle.numVars; v++) {
    const x = w.wp[v];
    if (x > 0 && x < 1) {
      value += -x * Math.log(x) - (1 - x) * Math.log(1 - x);
      grad[v - 1] = Math.log((1 - x) / x);
    } else {
      grad[v - 1] = x === 0 ? Infinity : -Infinity;
    }
  }
  return { value, grad };
}

export interface BatchResult {
  /** Per-row loss; Infinity at masked rows. */
  values: Float64Array;
  /** Row-major B x numVars gradients; all-zero at masked rows. */
  grads: Float64Array;
  /** 1 where the row evaluated, 0 where it was masked. */
  valid: Uint8Array;
  /** Per-row failure message, null where valid. */
  errors: (string | null)[];
}

function asRows(p: ReadonlyArray<ArrayLike<number>> | Float64Array, numVars: number): ArrayLike<number>[] {
  if (p instanceof Float64Array) {
    if (numVars <= 0 || p.length % numVars !== 0) {
      throw new Error(`flat batch of length ${p.length} is not a multiple of numVars ${numVars}`);
    }
    const rows: ArrayLike<number>[] = [];
    for (let off = 0; off < p.length; off += numVars) {
      rows.push(p.subarray(off, off + numVars));
    }
    return rows;
  }
  return p.slice();
}

/**
 * Evaluate the combined objective on a batch of probability rows.
 *
 * Accepts either an array of rows or a flat row-major Float64Array whose
 * length is a multiple of handle.numVars. Defaults match the CLI loss
 * command: wSemantic 1, wEntropy 0.1, entropyKind 'nesy'.
 */
export function batchLoss(
  handle: CircuitHandle,
  p: ReadonlyArray<ArrayLike<number>> | Float64Array,
  options: LossOptions = {}
): BatchResult {
  const ws = options.wSemantic ?? 1.0;
  const we = options.wEntropy ?? 0.1;
  const kind = options.entropyKind ?? 'nesy';
  if (kind !== 'nesy' && kind !== 'full') {
    throw new Error(`unknown entropyKind ${JSON.stringify(kind)}`);
  }
  const rows = asRows(p, handle.numVars);
  const n = handle.numVars;
  const values = new Float64Array(rows.length);
  const grads = new Float64Array(rows.length * n);
  const valid = new Uint8Array(rows.length);
  const errors: (string | null)[] = new Array(rows.length).fill(null);
  const entFn = kind === 'nesy' ? nesyEntropy : fullEntropy;
  for (let i = 0; i < rows.length; i++) {
    const row = rows[i];
    if (row.length !== n) {
      throw new Error(`batch row ${i} has ${row.length} values, circuit has ${n} variables`);
    }
    try {
      const sem = semanticLoss(handle, row);
      let value = ws * sem.value;
      const out = grads.subarray(i * n, (i + 1) * n);
      if (we !== 0) {
        const ent = entFn(handle, row);
        value += we * ent.value;
        for (let j = 0; j < n; j++) out[j] = ws * sem.grad[j] + we * ent.grad[j];
      } else {
        for (let j = 0; j < n; j++) out[j] = ws * sem.grad[j];
      }
      values[i] = value;
      valid[i] = 1;
    } catch (err) {
      if (err instanceof ZeroWmcError || err instanceof RangeError) {
        values[i] = Infinity;
        grads.fill(0, i * n, (i + 1) * n);
        errors[i] = err.message;
      } else {
        throw err;
      }
    }
  }
  return { values, grads, valid, errors };
}
