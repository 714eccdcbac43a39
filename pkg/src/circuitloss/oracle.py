"""Brute-force reference computations for testing.

Deliberately simple and independent: formulas are re-evaluated by a local
recursive walk, CNFs by direct clause scanning, circuits by a standalone
bottom-up boolean pass, and the exhaustive determinism check works on
per-node truth tables.  Nothing here calls the query implementations it is
used to check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .errors import ComputeError, LimitError
from .formula import Atom, And, CnfFormula, Const, ExactlyOne, Formula, Implies, Not, Or, Xor


@dataclass
class ModelSet:
    """All satisfying total assignments of some target, as bool tuples
    indexed by var-1."""

    num_vars: int
    models: list
    source: str = ""

    def __len__(self):
        return len(self.models)

    def as_dicts(self):
        for m in self.models:
            yield {v: m[v - 1] for v in range(1, self.num_vars + 1)}


def enumerate_models(target, var_cap: int = 20) -> ModelSet:
    """Enumerate all models of a Formula, CnfFormula, or Circuit by trying
    every total assignment over vars 1..n."""
    if isinstance(target, Formula):
        n = max(target.vars(), default=0)
        sat = lambda m: _eval_formula(target, m)
        source = "formula"
    elif isinstance(target, CnfFormula):
        n = target.num_vars
        sat = lambda m: _eval_cnf(target.clauses, m)
        source = "cnf"
    elif isinstance(target, Circuit):
        n = target.num_vars
        sat = lambda m: _eval_circuit(target, m)
        source = "circuit"
    else:
        raise TypeError(f"cannot enumerate models of {type(target).__name__}")
    if n > var_cap:
        raise LimitError(f"enumeration over {n} vars exceeds cap {var_cap}")
    models = [m for m in itertools.product((False, True), repeat=n) if sat(m)]
    return ModelSet(n, models, source)


def _eval_formula(f, m) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Atom):
        return m[f.var - 1] == f.positive
    if isinstance(f, Not):
        return not _eval_formula(f.child, m)
    if isinstance(f, And):
        return all(_eval_formula(g, m) for g in f.args)
    if isinstance(f, Or):
        return any(_eval_formula(g, m) for g in f.args)
    if isinstance(f, Implies):
        return (not _eval_formula(f.lhs, m)) or _eval_formula(f.rhs, m)
    if isinstance(f, Xor):
        return _eval_formula(f.lhs, m) != _eval_formula(f.rhs, m)
    if isinstance(f, ExactlyOne):
        return sum(1 for g in f.args if _eval_formula(g, m)) == 1
    raise TypeError(f"not a formula node: {f!r}")


def _eval_cnf(clauses, m) -> bool:
    for clause in clauses:
        for lit in clause:
            if (lit > 0) == m[abs(lit) - 1]:
                break
        else:
            return False
    return True


def _eval_circuit(circuit, m) -> bool:
    vals = [False] * len(circuit.nodes)
    for i, n in enumerate(circuit.nodes):
        k = n.kind
        if k == "literal":
            vals[i] = m[abs(n.literal) - 1] == (n.literal > 0)
        elif k == "and":
            vals[i] = all(vals[c] for c in n.children)
        elif k == "or":
            vals[i] = any(vals[c] for c in n.children)
        elif k == "true":
            vals[i] = True
    return vals[circuit.root]


def _mass(m, weights, num_vars) -> float:
    prod = 1.0
    for v in range(1, num_vars + 1):
        prod *= weights.w_pos[v] if m[v - 1] else weights.w_neg[v]
    return prod


def brute_wmc(models: ModelSet, weights) -> float:
    return sum(_mass(m, weights, models.num_vars) for m in models.models)


def brute_entropy(models: ModelSet, weights) -> float:
    """Shannon entropy (nats) of the weight distribution restricted to the
    models and renormalized."""
    masses = [_mass(m, weights, models.num_vars) for m in models.models]
    total = sum(masses)
    if total <= 0.0:
        raise ComputeError("zero total mass: entropy undefined")
    h = 0.0
    for x in masses:
        if x > 0.0:
            r = x / total
            h -= r * math.log(r)
    return max(h, 0.0)


@dataclass
class DeterminismReport:
    ok: bool
    violations: list  # (or_node_id, witness assignment index)


def check_determinism_exhaustive(circuit: Circuit, var_cap: int = 16) -> DeterminismReport:
    """For every total assignment and every OR node, count children that
    evaluate true; pass iff every count <= 1.

    Internally each node's full truth table is held as a Python int with one
    bit per assignment (bit a = value under assignment index a, var v true
    iff bit v-1 of a is set), so the check stays exhaustive while running at
    bigint speed.
    """
    n = circuit.num_vars
    if n > var_cap:
        raise LimitError(f"exhaustive check over {n} vars exceeds cap {var_cap}")
    size = 1 << n
    full = (1 << size) - 1

    def var_table(v: int) -> int:
        half = 1 << (v - 1)
        period_val = ((1 << half) - 1) << half
        period_len = half * 2
        reps = size // period_len
        repunit = ((1 << (period_len * reps)) - 1) // ((1 << period_len) - 1)
        return period_val * repunit

    tables = [0] * len(circuit.nodes)
    for i, node in enumerate(circuit.nodes):
        k = node.kind
        if k == "literal":
            t = var_table(abs(node.literal))
            tables[i] = t if node.literal > 0 else (~t & full)
        elif k == "and":
            t = full
            for c in node.children:
                t &= tables[c]
            tables[i] = t
        elif k == "or":
            t = 0
            for c in node.children:
                t |= tables[c]
            tables[i] = t
        elif k == "true":
            tables[i] = full

    violations = []
    for i, node in enumerate(circuit.nodes):
        if node.kind != "or" or len(node.children) <= 1:
            continue
        ch = node.children
        done = False
        for x in range(len(ch)):
            for y in range(x + 1, len(ch)):
                overlap = tables[ch[x]] & tables[ch[y]]
                if overlap:
                    witness = (overlap & -overlap).bit_length() - 1
                    violations.append((i, witness))
                    done = True
                    break
            if done:
                break
    return DeterminismReport(not violations, violations)


def finite_diff(fn, p, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of fn at p, one-sided at the [0,1] border.

    fn maps a probability vector to a float.  h must be positive.
    """
    if h <= 0:
        raise ValueError("finite_diff step must be positive")
    p = np.asarray(p, dtype=float)
    grad = np.zeros_like(p)
    base = None
    for i in range(p.size):
        up = p.copy()
        dn = p.copy()
        up[i] += h
        dn[i] -= h
        if up[i] > 1.0:
            if base is None:
                base = fn(p)
            grad[i] = (base - fn(dn)) / h
        elif dn[i] < 0.0:
            if base is None:
                base = fn(p)
            grad[i] = (fn(up) - base) / h
        else:
            grad[i] = (fn(up) - fn(dn)) / (2.0 * h)
    return grad
