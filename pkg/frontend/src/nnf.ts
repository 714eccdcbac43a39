/**
 * NNF circuit files: parsing and structural validation.
 *
 * Format, one node per line, ids are 0-based line positions, root is the
 * last node:
 *
 *   nnf <nodes> <edges> <vars>
 *   L <lit>
 *   A <count> <ids...>           A 0 is the true node
 *   O <dvar> <count> <ids...>    O 0 0 is the false node
 *
 * Loading validates the three structural properties the query passes rely
 * on: decomposability (AND children mention disjoint variables), smoothness
 * (OR children mention identical variables) and determinism (OR children
 * pairwise exclusive, certified syntactically). A circuit failing any check
 * is rejected with an error naming the violating node.
 */

import { readFileSync } from 'node:fs';

export type NodeKind = 'literal' | 'and' | 'or' | 'true' | 'false';

export interface CircuitNode {
  kind: NodeKind;
  children: number[];
  /** Signed variable index; nonzero only for literal nodes. */
  literal: number;
  /** Decision variable recorded on OR nodes, 0 when unknown. */
  decisionVar: number;
}

export class NnfParseError extends Error {
  readonly line?: number;

  constructor(message: string, line?: number) {
    super(line === undefined ? message : `${message} (line ${line})`);
    this.name = 'NnfParseError';
    this.line = line;
  }
}

export class CircuitStructureError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'CircuitStructureError';
  }
}

function node(kind: NodeKind, children: number[] = [], literal = 0, decisionVar = 0): CircuitNode {
  return { kind, children, literal, decisionVar };
}

function checkRefs(children: number[], defined: number, line: number): void {
  for (const c of children) {
    if (!Number.isInteger(c) || c < 0 || c >= defined) {
      throw new NnfParseError(`child id ${c} not yet defined (forward reference)`, line);
    }
  }
}

function parseInts(parts: string[], line: number): number[] {
  return parts.map((p) => {
    const v = Number(p);
    if (!Number.isInteger(v)) {
      throw new NnfParseError(`non-integer field ${JSON.stringify(p)}`, line);
    }
    return v;
  });
}

export interface ParsedNnf {
  nodes: CircuitNode[];
  numVars: number;
  edgeCount: number;
}

export function parseNnf(text: string): ParsedNnf {
  let header: number[] | null = null;
  let headerLine = 0;
  const nodes: CircuitNode[] = [];
  let edges = 0;
  const lines = text.split('\n');
  for (let i = 0; i < lines.length; i++) {
    const lineNo = i + 1;
    const line = lines[i].trim();
    if (line === '' || line.startsWith('c')) continue;
    const parts = line.split(/\s+/);
    if (header === null) {
      if (parts[0] !== 'nnf' || parts.length !== 4) {
        throw new NnfParseError("expected header 'nnf <nodes> <edges> <vars>'", lineNo);
      }
      header = parseInts(parts.slice(1), lineNo);
      headerLine = lineNo;
      continue;
    }
    const kind = parts[0];
    const args = parseInts(parts.slice(1), lineNo);
    if (kind === 'L') {
      if (args.length !== 1 || args[0] === 0) {
        throw new NnfParseError("literal line must be 'L <nonzero lit>'", lineNo);
      }
      if (Math.abs(args[0]) > header[2]) {
        throw new NnfParseError(`literal ${args[0]} out of range 1..${header[2]}`, lineNo);
      }
      nodes.push(node('literal', [], args[0]));
    } else if (kind === 'A') {
      if (args.length === 0 || args[0] !== args.length - 1) {
        throw new NnfParseError('AND child count mismatch', lineNo);
      }
      if (args[0] === 0) {
        nodes.push(node('true'));
      } else {
        const children = args.slice(1);
        checkRefs(children, nodes.length, lineNo);
        nodes.push(node('and', children));
        edges += children.length;
      }
    } else if (kind === 'O') {
      if (args.length < 2 || args[1] !== args.length - 2) {
        throw new NnfParseError('OR child count mismatch', lineNo);
      }
      if (args[1] === 0) {
        nodes.push(node('false'));
      } else {
        const children = args.slice(2);
        checkRefs(children, nodes.length, lineNo);
        nodes.push(node('or', children, 0, Math.max(args[0], 0)));
        edges += children.length;
      }
    } else {
      throw new NnfParseError(`unknown node line ${JSON.stringify(line)}`, lineNo);
    }
  }
  if (header === null) throw new NnfParseError("missing 'nnf' header", 1);
  if (nodes.length !== header[0]) {
    throw new NnfParseError(`header declares ${header[0]} nodes, found ${nodes.length}`, headerLine);
  }
  if (edges !== header[1]) {
    throw new NnfParseError(`header declares ${header[1]} edges, found ${edges}`, headerLine);
  }
  if (nodes.length === 0) throw new NnfParseError('empty circuit', headerLine);
  return { nodes, numVars: header[2], edgeCount: edges };
}

/** Per-node mentioned-variable sets as bitmasks (bit v-1 = variable v). */
function varsetBits(nodes: CircuitNode[]): bigint[] {
  const sets = new Array<bigint>(nodes.length).fill(0n);
  for (let i = 0; i < nodes.length; i++) {
    const n = nodes[i];
    if (n.kind === 'literal') {
      sets[i] = 1n << BigInt(Math.abs(n.literal) - 1);
    } else if (n.children.length > 0) {
      let m = 0n;
      for (const c of n.children) m |= sets[c];
      sets[i] = m;
    }
  }
  return sets;
}

/** Positive/negative literals conjoined at the top of each node: unioned
 * through ANDs, cut off at ORs. */
function surfaceMasks(nodes: CircuitNode[]): { pos: bigint[]; neg: bigint[] } {
  const pos = new Array<bigint>(nodes.length).fill(0n);
  const neg = new Array<bigint>(nodes.length).fill(0n);
  for (let i = 0; i < nodes.length; i++) {
    const n = nodes[i];
    if (n.kind === 'literal') {
      const b = 1n << BigInt(Math.abs(n.literal) - 1);
      if (n.literal > 0) pos[i] = b;
      else neg[i] = b;
    } else if (n.kind === 'and') {
      let p = 0n;
      let q = 0n;
      for (const c of n.children) {
        p |= pos[c];
        q |= neg[c];
      }
      pos[i] = p;
      neg[i] = q;
    }
  }
  return { pos, neg };
}

function firstNonDecomposable(nodes: CircuitNode[], sets: bigint[]): number {
  for (let i = 0; i < nodes.length; i++) {
    const n = nodes[i];
    if (n.kind !== 'and') continue;
    let acc = 0n;
    for (const c of n.children) {
      if ((acc & sets[c]) !== 0n) return i;
      acc |= sets[c];
    }
  }
  return -1;
}

function firstNonSmooth(nodes: CircuitNode[], sets: bigint[]): number {
  for (let i = 0; i < nodes.length; i++) {
    const n = nodes[i];
    if (n.kind !== 'or' || n.children.length <= 1) continue;
    const first = sets[n.children[0]];
    for (let j = 1; j < n.children.length; j++) {
      if (sets[n.children[j]] !== first) return i;
    }
  }
  return -1;
}

// beyond this many OR children the pairwise exclusivity scan is skipped and
// the node is reported as uncertified
const PAIRWISE_CAP = 2000;

function firstUncertifiedOr(nodes: CircuitNode[], sets: bigint[]): number {
  const { pos, neg } = surfaceMasks(nodes);
  for (let i = 0; i < nodes.length; i++) {
    const n = nodes[i];
    if (n.kind !== 'or' || n.children.length <= 1) continue;
    const universe = sets[i];
    // distinct complete terms over the node's variable set are exclusive
    const masks = new Set<bigint>();
    let complete = true;
    for (const c of n.children) {
      if ((pos[c] & neg[c]) !== 0n || (pos[c] | neg[c]) !== universe) {
        complete = false;
        break;
      }
      masks.add(pos[c]);
    }
    if (complete && masks.size === n.children.length) continue;
    const ch = n.children;
    if (ch.length > PAIRWISE_CAP) return i;
    let ok = true;
    for (let x = 0; x < ch.length && ok; x++) {
      const a = ch[x];
      for (let y = x + 1; y < ch.length; y++) {
        const b = ch[y];
        if (((pos[a] & neg[b]) | (neg[a] & pos[b])) === 0n) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) return i;
  }
  return -1;
}

/**
 * Loaded, validated circuit. Immutable after construction; queries allocate
 * per-call buffers only, so a handle can be shared freely.
 */
export class CircuitHandle {
  readonly nodes: readonly CircuitNode[];
  readonly root: number;
  readonly numVars: number;
  readonly edgeCount: number;
  /** Variables 1..numVars not mentioned anywhere under the root, ascending. */
  readonly rootMissing: readonly number[];

  constructor(parsed: ParsedNnf) {
    this.nodes = parsed.nodes;
    this.root = parsed.nodes.length - 1;
    this.numVars = parsed.numVars;
    this.edgeCount = parsed.edgeCount;

    const sets = varsetBits(parsed.nodes);
    const badAnd = firstNonDecomposable(parsed.nodes, sets);
    if (badAnd >= 0) {
      throw new CircuitStructureError(
        `circuit is not decomposable: AND node ${badAnd} repeats a variable across children`
      );
    }
    const badOr = firstNonSmooth(parsed.nodes, sets);
    if (badOr >= 0) {
      throw new CircuitStructureError(
        `circuit is not smooth: OR node ${badOr} has children over different variable sets`
      );
    }
    const badDet = firstUncertifiedOr(parsed.nodes, sets);
    if (badDet >= 0) {
      throw new CircuitStructureError(
        `cannot certify determinism: OR node ${badDet} has children that are not syntactically exclusive`
      );
    }

    const rootSet = sets[this.root];
    const missing: number[] = [];
    for (let v = 1; v <= parsed.numVars; v++) {
      if ((rootSet & (1n << BigInt(v - 1))) === 0n) missing.push(v);
    }
    this.rootMissing = missing;
  }
}

/** Read and validate an NNF file; throws NnfParseError or CircuitStructureError. */
export function loadCircuit(path: string): CircuitHandle {
  let text: string;
  try {
    text = readFileSync(path, 'utf8');
  } catch (err) {
    const reason = err instanceof Error ? err.message : String(err);
    throw new NnfParseError(`cannot read ${path}: ${reason}`);
  }
  return loadCircuitFromText(text);
}

export function loadCircuitFromText(text: string): CircuitHandle {
  return new CircuitHandle(parseNnf(text));
}
