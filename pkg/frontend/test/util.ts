import { spawnSync } from 'node:child_process';
import { writeFileSync } from 'node:fs';

export interface CliResult {
  status: number | null;
  stdout: string;
  stderr: string;
}

/** Run the reference CLI; the python package must be installed in the
 * environment (pip install -e . at the repository root). */
export function cli(args: string[]): CliResult {
  const r = spawnSync('python3', ['-m', 'circuitloss', ...args], { encoding: 'utf8' });
  if (r.error) throw r.error;
  return { status: r.status, stdout: r.stdout, stderr: r.stderr };
}

export function cliOk(args: string[]): string {
  const r = cli(args);
  if (r.status !== 0) {
    throw new Error(`CLI exited ${r.status}: circuitloss ${args.join(' ')}\n${r.stderr}`);
  }
  return r.stdout;
}

/** Deterministic 32-bit PRNG so batch fixtures are reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function parseNumber(token: string): number {
  if (token === 'inf') return Infinity;
  if (token === '-inf') return -Infinity;
  const v = Number(token);
  if (Number.isNaN(v) && token !== 'nan') {
    throw new Error(`cannot parse number ${JSON.stringify(token)}`);
  }
  return v;
}

export type LossRow = { loss: number; grad: number[] } | { error: string };

/** Parse the stdout of the CLI loss command into one entry per row. */
export function parseLossOutput(stdout: string): LossRow[] {
  const rows: LossRow[] = [];
  for (const raw of stdout.split('\n')) {
    const line = raw.trim();
    if (line === '') continue;
    let m = /^row=(\d+) loss=(\S+) grad=(\S+)$/.exec(line);
    if (m) {
      if (Number(m[1]) !== rows.length) throw new Error(`out-of-order row line: ${line}`);
      rows.push({ loss: parseNumber(m[2]), grad: m[3].split(',').map(parseNumber) });
      continue;
    }
    m = /^row=(\d+) error=(.*)$/.exec(line);
    if (m) {
      if (Number(m[1]) !== rows.length) throw new Error(`out-of-order row line: ${line}`);
      rows.push({ error: m[2] });
      continue;
    }
    throw new Error(`unrecognized loss output line: ${line}`);
  }
  return rows;
}

export function writeBatchFile(path: string, rows: number[][]): void {
  const n = rows.length > 0 ? rows[0].length : 0;
  const body = rows.map((r) => r.join(' ')).join('\n');
  writeFileSync(path, `batch ${rows.length} ${n}\n${body}\n`);
}

export function writeWeightsFile(path: string, p: number[]): void {
  const lines = p.map((x, i) => `${i + 1} ${x}`);
  writeFileSync(path, lines.join('\n') + '\n');
}
