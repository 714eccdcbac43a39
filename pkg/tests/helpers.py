"""Shared test utilities.

Everything here is written independently of the package internals: its own
CNF evaluator, its own circuit evaluator, its own grid path counter.  Tests
compare package results against these, so none of them may import package
evaluation code paths.
"""

import math

import numpy as np


def eval_cnf_bits(clauses, bits):
    """bits[v-1] is the value of var v."""
    return all(any((l > 0) == bool(bits[abs(l) - 1]) for l in c) for c in clauses)


def cnf_models(num_vars, clauses):
    """All satisfying assignments as bit tuples, by full enumeration."""
    out = []
    for a in range(1 << num_vars):
        bits = tuple((a >> i) & 1 for i in range(num_vars))
        if eval_cnf_bits(clauses, bits):
            out.append(bits)
    return out


def eval_circuit_bits(circuit, bits):
    """Independent bottom-up circuit evaluation."""
    vals = [False] * len(circuit.nodes)
    for i, n in enumerate(circuit.nodes):
        if n.kind == "literal":
            vals[i] = bool(bits[abs(n.literal) - 1]) == (n.literal > 0)
        elif n.kind == "and":
            vals[i] = all(vals[c] for c in n.children)
        elif n.kind == "or":
            vals[i] = any(vals[c] for c in n.children)
        elif n.kind == "true":
            vals[i] = True
        else:
            vals[i] = False
    return vals[circuit.root]


def circuit_models(circuit):
    out = []
    for a in range(1 << circuit.num_vars):
        bits = tuple((a >> i) & 1 for i in range(circuit.num_vars))
        if eval_circuit_bits(circuit, bits):
            out.append(bits)
    return out


def weighted_sum(models, probs):
    """Sum over models of prod p^bit (1-p)^(1-bit)."""
    total = 0.0
    for bits in models:
        m = 1.0
        for b, p in zip(bits, probs):
            m *= p if b else 1.0 - p
        total += m
    return total


def conditioned_entropy(models, probs):
    """Entropy in nats of the factorized distribution restricted to models."""
    masses = []
    for bits in models:
        m = 1.0
        for b, p in zip(bits, probs):
            m *= p if b else 1.0 - p
        masses.append(m)
    z = sum(masses)
    h = 0.0
    for m in masses:
        r = m / z
        if r > 0.0:
            h -= r * math.log(r)
    return h


def random_clause(rng, n, max_len=4):
    k = int(rng.integers(1, max_len + 1))
    vs = rng.choice(np.arange(1, n + 1), size=min(k, n), replace=False)
    return [int(v) * (1 if rng.random() < 0.5 else -1) for v in vs]


def random_satisfiable_cnf(rng, max_vars=12, max_clauses=30):
    """(num_vars, clauses), satisfiable by construction (checked by the
    independent evaluator)."""
    while True:
        n = int(rng.integers(3, max_vars + 1))
        m = int(rng.integers(1, max_clauses + 1))
        clauses = [random_clause(rng, n) for _ in range(m)]
        if any(eval_cnf_bits(clauses, tuple((a >> i) & 1 for i in range(n)))
               for a in range(1 << n)):
            return n, clauses


def random_probs(rng, n, lo=0.05, hi=0.95):
    return rng.uniform(lo, hi, n)


def grid_path_count(rows, cols):
    """Number of simple paths in the rows x cols grid graph, each unordered
    endpoint pair counted once per distinct path.  Iterative DFS over
    coordinate cells, deliberately unlike the library's enumeration."""
    cells = [(r, c) for r in range(rows) for c in range(cols)]

    def neighbors(cell):
        r, c = cell
        for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < rows and 0 <= cc < cols:
                yield (rr, cc)

    count = 0
    for start_idx, start in enumerate(cells):
        # stack of (path, visited); count a path whenever its far end has a
        # larger cell index than the start, so each pair appears once
        stack = [([start], {start})]
        while stack:
            path, visited = stack.pop()
            for nxt in neighbors(path[-1]):
                if nxt in visited:
                    continue
                if cells.index(nxt) > start_idx:
                    count += 1
                stack.append((path + [nxt], visited | {nxt}))
    return count


def valid_grid_path_model(rows, cols, bits):
    """True iff bits decode to two endpoint indicators joined by one simple
    path whose edge set is exactly the active edge vars."""
    num_v = rows * cols
    indicators = [i for i in range(num_v) if bits[i]]
    if len(indicators) != 2:
        return False
    edge_list = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edge_list.append((r * cols + c, r * cols + c + 1))
            if r + 1 < rows:
                edge_list.append((r * cols + c, (r + 1) * cols + c))
    active = [edge_list[i] for i in range(len(edge_list)) if bits[num_v + i]]
    if not active:
        return False
    degree = {}
    for u, v in active:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    touched = set(degree)
    # a simple path has exactly 2 degree-1 endpoints, all others degree 2,
    # |edges| = |vertices| - 1, and one connected component
    ends = sorted(v for v, d in degree.items() if d == 1)
    if ends != sorted(indicators):
        return False
    if any(d > 2 for d in degree.values()):
        return False
    if len(active) != len(touched) - 1:
        return False
    seen = {ends[0]}
    frontier = [ends[0]]
    while frontier:
        here = frontier.pop()
        for u, v in active:
            for a, b in ((u, v), (v, u)):
                if a == here and b not in seen:
                    seen.add(b)
                    frontier.append(b)
    return seen == touched
