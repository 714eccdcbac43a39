"""Exhaustive CNF-to-circuit compilation.

The search is classic model-counting DPLL: propagate units to fixpoint,
split the residual clauses into variable-disjoint components (compiled
independently and conjoined), otherwise pick a branch variable and emit a
decision OR over the two cofactors.  Identical residual subproblems are
served from a cache keyed on the canonicalized clause set, so repeated
subcircuits are shared.

Every OR in the output is a two-way decision on a variable (or degenerate
after simplification), making the circuit deterministic by construction;
AND nodes only conjoin literals and variable-disjoint components, making it
decomposable.  With ``smooth_output`` the result is also smoothed and covers
all declared variables.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .circuit import Circuit, CircuitBuilder, smooth
from .errors import ComputeError, LimitError
from .formula import CnfFormula

VarOrder = Union[str, Sequence[int]]


@dataclass
class CompileOptions:
    # var_order: "most_frequent", "dfs_fixed", or an explicit variable list
    # (listed vars branch first in list order; unlisted vars follow, smallest
    # index first).
    var_order: VarOrder = "most_frequent"
    cache_bytes_cap: int = 256 * 1024 * 1024
    clause_cap: int = 100_000
    smooth_output: bool = True
    timeout_s: Optional[float] = None


@dataclass
class CompileStats:
    nodes: int = 0
    edges: int = 0
    cache_hits: int = 0
    cache_entries: int = 0
    cache_bytes: int = 0
    decisions: int = 0
    time_ms: float = 0.0


@dataclass
class PropagationResult:
    implied: list  # literals in propagation order
    residual: list  # clauses with no units left
    conflict: bool


def _assign(clauses, lit):
    """Clauses reduced under lit=true: satisfied clauses dropped, the
    opposite literal removed elsewhere."""
    out = []
    for c in clauses:
        if lit in c:
            continue
        if -lit in c:
            out.append(tuple(x for x in c if x != -lit))
        else:
            out.append(c)
    return out


def unit_propagate(clauses) -> PropagationResult:
    """Apply unit-clause implications to fixpoint."""
    implied = []
    residual = [tuple(c) for c in clauses]
    while True:
        unit = None
        for c in residual:
            if not c:
                return PropagationResult(implied, [], True)
            if len(c) == 1:
                unit = c[0]
                break
        if unit is None:
            return PropagationResult(implied, residual, False)
        implied.append(unit)
        residual = _assign(residual, unit)


def decompose_components(clauses):
    """Partition clauses into variable-connectivity components, ordered by
    first clause occurrence."""
    clauses = [tuple(c) for c in clauses]
    parent = {}

    def find(v):
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    for c in clauses:
        vs = [abs(l) for l in c]
        for v in vs:
            parent.setdefault(v, v)
        for a, b in zip(vs, vs[1:]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

    groups = {}
    order = []
    for c in clauses:
        if not c:
            raise ComputeError("decompose_components on a conflicting clause set")
        root = find(abs(c[0]))
        if root not in groups:
            groups[root] = []
            order.append(root)
        groups[root].append(c)
    return [groups[r] for r in order]


def pick_branch_var(clauses, heuristic: VarOrder = "most_frequent") -> int:
    """Select the next decision variable from a non-empty clause set."""
    present = set()
    for c in clauses:
        for l in c:
            present.add(abs(l))
    if not present:
        raise ComputeError("pick_branch_var on an empty clause set")
    if heuristic == "dfs_fixed":
        return min(present)
    if heuristic == "most_frequent":
        counts = {}
        for c in clauses:
            for v in {abs(l) for l in c}:
                counts[v] = counts.get(v, 0) + 1
        # most clauses first, ties to the smallest index
        return min(present, key=lambda v: (-counts.get(v, 0), v))
    if isinstance(heuristic, str):
        raise ValueError(f"unknown branch heuristic {heuristic!r}")
    pos = {int(v): i for i, v in enumerate(heuristic)}
    big = len(pos)
    return min(present, key=lambda v: (pos.get(v, big), v))


def _key_size(key) -> int:
    return sys.getsizeof(key) + sum(sys.getsizeof(c) for c in key)


def compile(cnf: CnfFormula, options: Optional[CompileOptions] = None) -> Circuit:
    """Compile CNF into a smooth deterministic decomposable circuit.

    The result covers vars 1..cnf.num_vars (free variables included via
    smoothing).  Identical input and options give byte-identical NNF output.
    """
    opts = options or CompileOptions()
    cnf.validate()
    if isinstance(opts.var_order, str) and opts.var_order not in ("most_frequent", "dfs_fixed"):
        raise ValueError(f"unknown var_order {opts.var_order!r}")
    if len(cnf.clauses) > opts.clause_cap:
        raise LimitError(f"input has {len(cnf.clauses)} clauses, cap is {opts.clause_cap}")
    start = time.monotonic()
    deadline = None if opts.timeout_s is None else start + opts.timeout_s
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * cnf.num_vars + 1000))

    builder = CircuitBuilder(cnf.num_vars)
    cache = {}
    stats = CompileStats()

    def solve(clauses) -> int:
        if deadline is not None and time.monotonic() > deadline:
            raise ComputeError(f"compile timeout after {opts.timeout_s} s")
        key = tuple(sorted(set(tuple(sorted(c)) for c in clauses)))
        hit = cache.get(key)
        if hit is not None:
            stats.cache_hits += 1
            return hit
        prop = unit_propagate(clauses)
        if prop.conflict:
            node = builder.false()
        else:
            lead = [builder.literal(l) for l in sorted(prop.implied, key=abs)]
            if not prop.residual:
                node = builder.conj(lead)
            else:
                comps = decompose_components(prop.residual)
                if len(comps) == 1:
                    parts = [branch(comps[0])]
                else:
                    parts = [solve(comp) for comp in comps]
                node = builder.conj(lead + parts)
        stats.cache_bytes += _key_size(key)
        if stats.cache_bytes > opts.cache_bytes_cap:
            _finish_stats(stats, cache, start)
            raise LimitError(
                f"component cache exceeded {opts.cache_bytes_cap} bytes", stats=stats
            )
        cache[key] = node
        return node

    def branch(comp) -> int:
        stats.decisions += 1
        v = pick_branch_var(comp, opts.var_order)
        hi = solve(_assign(comp, v))
        lo = solve(_assign(comp, -v))
        t = builder.conj([builder.literal(v), hi])
        f = builder.conj([builder.literal(-v), lo])
        return builder.disj([t, f], decision_var=v)

    root = solve([tuple(c) for c in cnf.clauses])
    circuit = builder.seal(root, deterministic=True)
    if opts.smooth_output:
        circuit = smooth(circuit)
    _finish_stats(stats, cache, start)
    stats.nodes = len(circuit.nodes)
    stats.edges = circuit.edge_count
    circuit.stats = stats
    return circuit


def _finish_stats(stats, cache, start):
    stats.cache_entries = len(cache)
    stats.time_ms = (time.monotonic() - start) * 1000.0
