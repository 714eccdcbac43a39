import { beforeAll, describe, expect, it } from 'vitest';
import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { CircuitHandle, batchLoss, entropy, loadCircuit, wmc } from '../src/index.js';
import { cliOk, mulberry32, parseLossOutput, writeBatchFile, writeWeightsFile } from './util.js';

// Every value the client computes must agree with the reference CLI to this
// tolerance. The CLI prints 12 significant digits, so parsed values carry
// quantization around 1e-11 on the magnitudes seen here.
const TOL = 1e-9;

const IMPL_DSL = '(implies (and A B) C)\n';
const P0 = [0.3, 0.5, 0.2];

let dir: string;
let nnfPath: string;
let handle: CircuitHandle;

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), 'circuitloss-parity-'));
  const dslPath = join(dir, 'impl.dsl');
  nnfPath = join(dir, 'impl.nnf');
  writeFileSync(dslPath, IMPL_DSL);
  cliOk(['compile', '--dsl', dslPath, '--order', '3,1,2', '-o', nnfPath]);
  handle = loadCircuit(nnfPath);
});

/** Brute-force reference for the three-variable implication, independent of
 * both the client and the CLI: enumerate all eight assignments. */
function bruteImplication(p: number[]): { wmc: number; entropy: number } {
  let total = 0;
  const masses: number[] = [];
  for (let bits = 0; bits < 8; bits++) {
    const a = (bits & 1) !== 0;
    const b = (bits & 2) !== 0;
    const c = (bits & 4) !== 0;
    if (a && b && !c) continue;
    const w = (a ? p[0] : 1 - p[0]) * (b ? p[1] : 1 - p[1]) * (c ? p[2] : 1 - p[2]);
    masses.push(w);
    total += w;
  }
  let h = 0;
  for (const m of masses) {
    if (m > 0) {
      const r = m / total;
      h -= r * Math.log(r);
    }
  }
  return { wmc: total, entropy: h };
}

describe('reference point', () => {
  it('loads the compiled circuit', () => {
    expect(handle.numVars).toBe(3);
    expect(handle.rootMissing).toEqual([]);
  });

  it('matches the CLI and the brute-force oracle on wmc and entropy', () => {
    const wPath = join(dir, 'p0.weights');
    writeWeightsFile(wPath, P0);
    const brute = bruteImplication(P0);

    const cliWmc = Number(cliOk(['wmc', '-c', nnfPath, '-w', wPath]).trim().split('=')[1]);
    expect(Math.abs(wmc(handle, P0) - brute.wmc)).toBeLessThanOrEqual(1e-12);
    expect(Math.abs(wmc(handle, P0) - cliWmc)).toBeLessThanOrEqual(TOL);

    const entLine = cliOk(['entropy', '-c', nnfPath, '-w', wPath]).trim();
    const cliEntropy = Number(entLine.split('=')[1]);
    expect(Math.abs(entropy(handle, P0) - brute.entropy)).toBeLessThanOrEqual(1e-12);
    expect(Math.abs(entropy(handle, P0) - cliEntropy)).toBeLessThanOrEqual(TOL);
  });

  it('matches the CLI loss at unit weights', () => {
    const bPath = join(dir, 'p0.batch');
    writeBatchFile(bPath, [P0]);
    const out = cliOk(['loss', '-c', nnfPath, '--batch', bPath, '--w-semantic', '1', '--w-entropy', '1']);
    const rows = parseLossOutput(out);
    expect(rows.length).toBe(1);
    const expected = rows[0];
    if ('error' in expected) throw new Error(`CLI masked the reference row: ${expected.error}`);

    const res = batchLoss(handle, [P0], { wSemantic: 1, wEntropy: 1, entropyKind: 'nesy' });
    expect(res.valid[0]).toBe(1);
    expect(Math.abs(res.values[0] - expected.loss)).toBeLessThanOrEqual(TOL);
    for (let j = 0; j < 3; j++) {
      expect(Math.abs(res.grads[j] - expected.grad[j])).toBeLessThanOrEqual(TOL);
    }

    // cross-check against the enumeration oracle as well
    const brute = bruteImplication(P0);
    expect(Math.abs(res.values[0] - (-Math.log(brute.wmc) + brute.entropy))).toBeLessThanOrEqual(TOL);
  });
});

function randomBatch(): number[][] {
  const rng = mulberry32(0x51e5eed);
  const rows: number[][] = [];
  for (let i = 0; i < 64; i++) {
    rows.push([0.02 + 0.96 * rng(), 0.02 + 0.96 * rng(), 0.02 + 0.96 * rng()]);
  }
  // rows that force A and B true but C false have zero constraint probability
  rows[10] = [1, 1, 0];
  rows[40] = [1, 1, 0];
  return rows;
}

function checkBatchParity(rows: number[][], cliArgs: string[], opts: Parameters<typeof batchLoss>[2]) {
  const bPath = join(dir, `batch-${cliArgs.join('') || 'default'}.txt`);
  writeBatchFile(bPath, rows);
  const out = cliOk(['loss', '-c', nnfPath, '--batch', bPath, ...cliArgs]);
  const expected = parseLossOutput(out);
  expect(expected.length).toBe(rows.length);

  const res = batchLoss(handle, rows, opts);
  const maskedCli: number[] = [];
  const maskedClient: number[] = [];
  for (let i = 0; i < rows.length; i++) {
    const exp = expected[i];
    if ('error' in exp) {
      maskedCli.push(i);
      expect(res.values[i]).toBe(Infinity);
      expect(res.errors[i]).toBe(exp.error);
      expect(Array.from(res.grads.subarray(i * 3, i * 3 + 3))).toEqual([0, 0, 0]);
    } else {
      expect(res.valid[i]).toBe(1);
      expect(Math.abs(res.values[i] - exp.loss)).toBeLessThanOrEqual(TOL);
      for (let j = 0; j < 3; j++) {
        expect(Math.abs(res.grads[i * 3 + j] - exp.grad[j])).toBeLessThanOrEqual(TOL);
      }
    }
    if (res.valid[i] === 0) maskedClient.push(i);
  }
  expect(maskedClient).toEqual(maskedCli);
  return maskedCli;
}

describe('random batch', () => {
  it('matches the CLI row by row at the default objective', () => {
    const masked = checkBatchParity(randomBatch(), [], undefined);
    expect(masked).toEqual([10, 40]);
  });

  it('matches the CLI row by row with the full-entropy objective', () => {
    const masked = checkBatchParity(
      randomBatch(),
      ['--w-semantic', '1', '--w-entropy', '0.3', '--entropy-kind', 'full'],
      { wSemantic: 1, wEntropy: 0.3, entropyKind: 'full' }
    );
    expect(masked).toEqual([10, 40]);
  });
});
