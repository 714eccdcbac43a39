/**
 * Weighted queries over a loaded circuit.
 *
 * A probability row p assigns weight (p_v, 1-p_v) to variable v. wmc is the
 * probability that the constraint holds under the induced factorized
 * distribution; entropy is the Shannon entropy (nats) of that distribution
 * conditioned on the constraint. Both gradients are exact reverse-mode
 * sweeps over the forward recursions.
 *
 * Evaluation order mirrors the reference CLI implementation operation for
 * operation so results agree to float roundoff, far inside the 1e-9 parity
 * budget.
 */

import { CircuitHandle } from './nnf.js';

export class ZeroWmcError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ZeroWmcError';
  }
}

export interface RowWeights {
  /** wp[v] / wn[v] are the positive / negative weights of variable v; index 0 is padding. */
  wp: Float64Array;
  wn: Float64Array;
}

/** Validate a probability row and expand it to per-literal weights. */
export function rowWeights(p: ArrayLike<number>, numVars: number): RowWeights {
  if (p.length !== numVars) {
    throw new RangeError(`row has ${p.length} values, circuit has ${numVars} variables`);
  }
  const wp = new Float64Array(numVars + 1);
  const wn = new Float64Array(numVars + 1);
  for (let v = 1; v <= numVars; v++) {
    const x = p[v - 1];
    if (Number.isNaN(x) || x < 0 || x > 1) {
      throw new RangeError(`probability for var ${v} outside [0,1]: ${x}`);
    }
    wp[v] = x;
    wn[v] = 1 - x;
  }
  return { wp, wn };
}

function log(x: number): number {
  return x > 0 ? Math.log(x) : -Infinity;
}

/** Bottom-up mass per node: literal weight, AND product, OR sum. */
export function wmcPass(handle: CircuitHandle, w: RowWeights): Float64Array {
  const { wp, wn } = w;
  const nodes = handle.nodes;
  const vals = new Float64Array(nodes.length);
  for (let i = 0; i < nodes.length; i++) {
    const n = nodes[i];
    if (n.kind === 'literal') {
      vals[i] = n.literal > 0 ? wp[n.literal] : wn[-n.literal];
    } else if (n.kind === 'and') {
      let v = 1;
      for (const c of n.children) v *= vals[c];
      vals[i] = v;
    } else if (n.kind === 'or') {
      let v = 0;
      for (const c of n.children) v += vals[c];
      vals[i] = v;
    } else if (n.kind === 'true') {
      vals[i] = 1;
    }
    // false nodes keep 0
  }
  return vals;
}

export function wmc(handle: CircuitHandle, p: ArrayLike<number>): number {
  const w = rowWeights(p, handle.numVars);
  const vals = wmcPass(handle, w);
  let value = vals[handle.root];
  // variables the root never mentions marginalize to a factor wp + wn
  for (const v of handle.rootMissing) value *= w.wp[v] + w.wn[v];
  return value;
}

function binaryEntropy(r: number): number {
  let h = 0;
  if (r > 0) h -= r * Math.log(r);
  if (r < 1) h -= (1 - r) * Math.log(1 - r);
  return h;
}

/** Per-node conditioned entropy given the mass pass: AND adds children,
 * OR mixes normalized child masses. Zero-mass ORs stay at entropy 0. */
export function entropyPass(handle: CircuitHandle, vals: Float64Array): Float64Array {
  const nodes = handle.nodes;
  const hs = new Float64Array(nodes.length);
  for (let i = 0; i < nodes.length; i++) {
    const n = nodes[i];
    if (n.kind === 'and') {
      let h = 0;
      for (const c of n.children) h += hs[c];
      hs[i] = h;
    } else if (n.kind === 'or') {
      const wi = vals[i];
      if (wi === 0) continue;
      let mix = 0;
      let acc = 0;
      for (const c of n.children) {
        const r = vals[c] / wi;
        if (r > 0) {
          mix -= r * Math.log(r);
          acc += r * hs[c];
        }
      }
      hs[i] = mix + acc;
    }
  }
  return hs;
}

export function entropy(handle: CircuitHandle, p: ArrayLike<number>): number {
  const w = rowWeights(p, handle.numVars);
  const vals = wmcPass(handle, w);
  if (vals[handle.root] === 0) {
    throw new ZeroWmcError('constraint has zero probability under the given weights');
  }
  const hs = entropyPass(handle, vals);
  let value = hs[handle.root];
  for (const v of handle.rootMissing) {
    const s = w.wp[v] + w.wn[v];
    if (s > 0) value += binaryEntropy(w.wp[v] / s);
  }
  return Math.max(value, 0);
}

/** Reverse step through an AND: adjoint times the product of sibling masses. */
function pushAnd(lam: Float64Array, i: number, children: number[], vals: Float64Array): void {
  const li = lam[i];
  if (li === 0) return;
  if (children.length === 2) {
    const a = children[0];
    const b = children[1];
    lam[a] += li * vals[b];
    lam[b] += li * vals[a];
    return;
  }
  const k = children.length;
  const prefix = new Float64Array(k + 1);
  prefix[0] = 1;
  for (let idx = 0; idx < k; idx++) prefix[idx + 1] = prefix[idx] * vals[children[idx]];
  let suffix = 1;
  for (let idx = k - 1; idx >= 0; idx--) {
    const c = children[idx];
    lam[c] += li * prefix[idx] * suffix;
    suffix *= vals[c];
  }
}

function literalGrad(handle: CircuitHandle, lam: Float64Array): Float64Array {
  const grad = new Float64Array(handle.numVars);
  const nodes = handle.nodes;
  for (let i = 0; i < nodes.length; i++) {
    const n = nodes[i];
    if (n.kind !== 'literal') continue;
    const v = Math.abs(n.literal);
    if (n.literal > 0) grad[v - 1] += lam[i];
    else grad[v - 1] -= lam[i];
  }
  return grad;
}

/** d wmc / d p_v for every variable. */
export function wmcGradient(handle: CircuitHandle, p: ArrayLike<number>): Float64Array {
  const w = rowWeights(p, handle.numVars);
  const vals = wmcPass(handle, w);
  const nodes = handle.nodes;
  const lam = new Float64Array(nodes.length);
  lam[handle.root] = 1;
  for (let i = nodes.length - 1; i >= 0; i--) {
    if (lam[i] === 0) continue;
    const n = nodes[i];
    if (n.kind === 'and') {
      pushAnd(lam, i, n.children, vals);
    } else if (n.kind === 'or') {
      for (const c of n.children) lam[c] += lam[i];
    }
  }
  return literalGrad(handle, lam);
}

/** d entropy / d p_v, by joint reverse mode over the mass and entropy passes. */
export function entropyGradient(handle: CircuitHandle, p: ArrayLike<number>): Float64Array {
  const w = rowWeights(p, handle.numVars);
  const vals = wmcPass(handle, w);
  if (vals[handle.root] === 0) {
    throw new ZeroWmcError('constraint has zero probability under the given weights');
  }
  const hs = entropyPass(handle, vals);
  const nodes = handle.nodes;
  const lamW = new Float64Array(nodes.length);
  const lamH = new Float64Array(nodes.length);
  lamH[handle.root] = 1;
  for (let i = nodes.length - 1; i >= 0; i--) {
    const n = nodes[i];
    if (n.kind === 'or') {
      const wi = vals[i];
      const lw = lamW[i];
      const lh = lamH[i];
      for (const c of n.children) {
        if (lw !== 0) lamW[c] += lw;
        if (lh !== 0 && wi > 0) {
          const r = vals[c] / wi;
          lamH[c] += lh * r;
          if (r > 0) lamW[c] += (lh * (hs[c] - Math.log(r) - hs[i])) / wi;
        }
      }
    } else if (n.kind === 'and') {
      pushAnd(lamW, i, n.children, vals);
      const lh = lamH[i];
      if (lh !== 0) {
        for (const c of n.children) lamH[c] += lh;
      }
    }
  }
  const grad = literalGrad(handle, lamW);
  for (const v of handle.rootMissing) {
    const x = w.wp[v];
    grad[v - 1] += log(1 - x) - log(x);
  }
  return grad;
}
