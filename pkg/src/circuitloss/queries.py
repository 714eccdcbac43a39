"""Weighted queries over sealed circuits.

Weights assign a pair (w_pos, w_neg) to every variable.  In probability mode
(w_pos + w_neg = 1 for every non-aux variable) the weighted count of a
circuit equals the probability that the constraint holds under the induced
fully factorized distribution over variables.

The entropy query returns the Shannon entropy in nats of that distribution
conditioned on the constraint.  It is a single bottom-up pass over a smooth,
deterministic, decomposable circuit: literals carry zero entropy, an AND
adds its children's entropies, and an OR contributes the mixing entropy of
its normalized child masses plus the mass-weighted child entropies.

Gradients are exact reverse-mode sweeps over the same recursions, with
d/dp = +d/dw_pos - d/dw_neg per variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .circuit import Circuit, _iter_bits
from .errors import ParseError, StructureError, ZeroWmcError

_PROB_TOL = 1e-9


class LiteralWeights:
    """Literal weights for vars 1..num_vars (w_pos[0]/w_neg[0] are padding).

    ``aux`` marks encoding-introduced definition variables; they carry
    neutral (1, 1) weights, are ignored by the probability-mode test, and get
    zero gradient entries.
    """

    def __init__(self, w_pos, w_neg, aux=frozenset()):
        wp = [0.0] + [float(x) for x in w_pos]
        wn = [0.0] + [float(x) for x in w_neg]
        if len(wp) != len(wn):
            raise ValueError("w_pos and w_neg must have equal length")
        for v in range(1, len(wp)):
            for w in (wp[v], wn[v]):
                if math.isnan(w) or w < 0.0:
                    raise ValueError(f"weight for var {v} is NaN or negative: {w}")
        self.w_pos = tuple(wp)
        self.w_neg = tuple(wn)
        self.aux = frozenset(aux)
        self.num_vars = len(wp) - 1
        bad = [v for v in self.aux if not 1 <= v <= self.num_vars]
        if bad:
            raise ValueError(f"aux vars out of range: {bad}")
        self.probability_mode = all(
            abs(self.w_pos[v] + self.w_neg[v] - 1.0) <= _PROB_TOL
            and self.w_pos[v] <= 1.0 + _PROB_TOL
            for v in range(1, self.num_vars + 1)
            if v not in self.aux
        )

    @classmethod
    def from_probabilities(cls, p, num_vars=None, aux=()):
        """Weights (p_v, 1-p_v) per var; vars beyond len(p), and any listed
        in aux, get neutral (1, 1)."""
        p = [float(x) for x in p]
        n = len(p) if num_vars is None else int(num_vars)
        if n < len(p):
            raise ValueError("num_vars smaller than probability vector")
        aux = frozenset(int(v) for v in aux) | frozenset(range(len(p) + 1, n + 1))
        wp, wn = [], []
        for v in range(1, n + 1):
            if v in aux:
                wp.append(1.0)
                wn.append(1.0)
            else:
                x = p[v - 1]
                if math.isnan(x) or not 0.0 <= x <= 1.0:
                    raise ValueError(f"probability for var {v} outside [0,1]: {x}")
                wp.append(x)
                wn.append(1.0 - x)
        return cls(wp, wn, aux)

    @classmethod
    def uniform(cls, num_vars: int):
        return cls.from_probabilities([0.5] * num_vars)

    def probabilities(self) -> np.ndarray:
        """p per var (nan at aux positions); only valid in probability mode."""
        out = np.full(self.num_vars, np.nan)
        for v in range(1, self.num_vars + 1):
            if v not in self.aux:
                out[v - 1] = self.w_pos[v]
        return out


def parse_weights(text: str, num_vars: int, fill_uniform: bool = False,
                  aux=frozenset()) -> LiteralWeights:
    """Parse a weights file: lines '<var> <w_pos> <w_neg>' or the shorthand
    '<var> <p>' (meaning (p, 1-p)).  '#' starts a comment.  Vars not listed
    are an error unless fill_uniform supplies (0.5, 0.5); aux vars default to
    neutral (1, 1)."""
    aux = frozenset(aux)
    given = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError("expected '<var> <w_pos> <w_neg>' or '<var> <p>'", lineno)
        try:
            var = int(parts[0])
            nums = [float(x) for x in parts[1:]]
        except ValueError:
            raise ParseError(f"bad number in {line!r}", lineno) from None
        if not 1 <= var <= num_vars:
            raise ParseError(f"var {var} out of range 1..{num_vars}", lineno)
        if var in given:
            raise ParseError(f"duplicate entry for var {var}", lineno)
        if len(nums) == 1:
            p = nums[0]
            if math.isnan(p) or not 0.0 <= p <= 1.0:
                raise ParseError(f"probability for var {var} outside [0,1]", lineno)
            given[var] = (p, 1.0 - p)
        else:
            if any(math.isnan(x) or x < 0.0 for x in nums):
                raise ParseError(f"NaN or negative weight for var {var}", lineno)
            given[var] = (nums[0], nums[1])
    wp, wn = [], []
    missing = []
    for v in range(1, num_vars + 1):
        if v in given:
            wp.append(given[v][0])
            wn.append(given[v][1])
        elif v in aux:
            wp.append(1.0)
            wn.append(1.0)
        elif fill_uniform:
            wp.append(0.5)
            wn.append(0.5)
        else:
            missing.append(v)
    if missing:
        raise ParseError(f"missing weights for vars {missing[:10]}"
                         + ("..." if len(missing) > 10 else ""))
    return LiteralWeights(wp, wn, aux)


def format_weights(weights: LiteralWeights) -> str:
    lines = []
    for v in range(1, weights.num_vars + 1):
        lines.append(f"{v} {weights.w_pos[v]!r} {weights.w_neg[v]!r}")
    return "\n".join(lines) + "\n"


@dataclass
class QueryValue:
    value: float
    space: str = "linear"  # "linear" | "log"
    per_node: Optional[dict] = None  # node id -> (wmc, entropy-or-None)


def _check_pair(circuit: Circuit, weights: LiteralWeights) -> None:
    if weights.num_vars != circuit.num_vars:
        raise StructureError(
            f"weights cover {weights.num_vars} vars, circuit has {circuit.num_vars}")


def _require_flags(circuit: Circuit, *, smooth_needed: bool) -> None:
    if not circuit.decomposable:
        raise StructureError("query needs a decomposable circuit (flag unset)")
    if not circuit.deterministic_by_construction:
        raise StructureError("query needs a deterministic circuit (flag unset)")
    if smooth_needed and not circuit.smooth:
        raise StructureError("query needs a smooth circuit (flag unset)")


def _root_missing_bits(circuit: Circuit) -> int:
    full = (1 << circuit.num_vars) - 1
    return full & ~circuit.varset_bits()


def _wmc_pass(circuit: Circuit, weights: LiteralWeights):
    wp, wn = weights.w_pos, weights.w_neg
    vals = [0.0] * len(circuit.nodes)
    for i, n in enumerate(circuit.nodes):
        k = n.kind
        if k == "literal":
            l = n.literal
            vals[i] = wp[l] if l > 0 else wn[-l]
        elif k == "and":
            v = 1.0
            for c in n.children:
                v *= vals[c]
            vals[i] = v
        elif k == "or":
            v = 0.0
            for c in n.children:
                v += vals[c]
            vals[i] = v
        elif k == "true":
            vals[i] = 1.0
    return vals


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def _wmc_pass_log(circuit: Circuit, weights: LiteralWeights):
    wp, wn = weights.w_pos, weights.w_neg
    vals = [0.0] * len(circuit.nodes)
    for i, n in enumerate(circuit.nodes):
        k = n.kind
        if k == "literal":
            l = n.literal
            vals[i] = _log(wp[l] if l > 0 else wn[-l])
        elif k == "and":
            v = 0.0
            for c in n.children:
                v += vals[c]
            vals[i] = v
        elif k == "or":
            m = -math.inf
            for c in n.children:
                if vals[c] > m:
                    m = vals[c]
            if m == -math.inf:
                vals[i] = -math.inf
            else:
                s = 0.0
                for c in n.children:
                    s += math.exp(vals[c] - m)
                vals[i] = m + math.log(s)
        elif k == "true":
            vals[i] = 0.0
        else:
            vals[i] = -math.inf
    return vals


def wmc(circuit: Circuit, weights: LiteralWeights, *, log_space: bool = False,
        per_node: bool = False) -> QueryValue:
    """Weighted model count of the circuit.

    Smoothness is required unless the weights are in probability mode, where
    per-variable weights summing to one make marginalization of unmentioned
    variables implicit.
    """
    _check_pair(circuit, weights)
    _require_flags(circuit, smooth_needed=not weights.probability_mode)
    missing = _root_missing_bits(circuit)
    if log_space:
        vals = _wmc_pass_log(circuit, weights)
        value = vals[circuit.root]
        for v in _iter_bits(missing):
            value += _log(weights.w_pos[v] + weights.w_neg[v])
        table = {i: (vals[i], None) for i in range(len(vals))} if per_node else None
        return QueryValue(value, "log", table)
    vals = _wmc_pass(circuit, weights)
    value = vals[circuit.root]
    for v in _iter_bits(missing):
        value *= weights.w_pos[v] + weights.w_neg[v]
    table = {i: (vals[i], None) for i in range(len(vals))} if per_node else None
    return QueryValue(value, "linear", table)


def model_count(circuit: Circuit) -> int:
    """Exact number of models over vars 1..num_vars (arbitrary precision)."""
    _require_flags(circuit, smooth_needed=True)
    vals = [0] * len(circuit.nodes)
    for i, n in enumerate(circuit.nodes):
        k = n.kind
        if k == "literal":
            vals[i] = 1
        elif k == "and":
            v = 1
            for c in n.children:
                v *= vals[c]
            vals[i] = v
        elif k == "or":
            vals[i] = sum(vals[c] for c in n.children)
        elif k == "true":
            vals[i] = 1
    count = vals[circuit.root]
    free = bin(_root_missing_bits(circuit)).count("1")
    return count << free


def _binary_entropy(r: float) -> float:
    h = 0.0
    if r > 0.0:
        h -= r * math.log(r)
    if r < 1.0:
        h -= (1.0 - r) * math.log(1.0 - r)
    return h


def _entropy_pass(circuit: Circuit, w, log_space: bool):
    """Per-node entropies given the wmc pass (linear values or log values)."""
    hs = [0.0] * len(circuit.nodes)
    for i, n in enumerate(circuit.nodes):
        k = n.kind
        if k == "and":
            h = 0.0
            for c in n.children:
                h += hs[c]
            hs[i] = h
        elif k == "or":
            wi = w[i]
            if (wi == 0.0 and not log_space) or (log_space and wi == -math.inf):
                continue
            mix = 0.0
            acc = 0.0
            for c in n.children:
                r = math.exp(w[c] - wi) if log_space else w[c] / wi
                if r > 0.0:
                    mix -= r * math.log(r)
                    acc += r * hs[c]
            hs[i] = mix + acc
    return hs


def entropy(circuit: Circuit, weights: LiteralWeights, *, log_space: bool = False,
            per_node: bool = False) -> QueryValue:
    """Entropy (nats) of the weight distribution conditioned on the circuit.

    Requires a smooth, deterministic, decomposable circuit and nonzero wmc.
    With log_space the mass pass runs in log domain; the entropy itself is
    always a linear-space value.
    """
    _check_pair(circuit, weights)
    _require_flags(circuit, smooth_needed=True)
    w = _wmc_pass_log(circuit, weights) if log_space else _wmc_pass(circuit, weights)
    root_mass = w[circuit.root]
    if root_mass == (-math.inf if log_space else 0.0):
        raise ZeroWmcError("constraint has zero probability under the given weights")
    hs = _entropy_pass(circuit, w, log_space)
    value = hs[circuit.root]
    for v in _iter_bits(_root_missing_bits(circuit)):
        s = weights.w_pos[v] + weights.w_neg[v]
        if s > 0.0:
            value += _binary_entropy(weights.w_pos[v] / s)
    value = max(value, 0.0)
    table = None
    if per_node:
        table = {i: (w[i], hs[i]) for i in range(len(w))}
    return QueryValue(value, "log" if log_space else "linear", table)


def _literal_grad(circuit: Circuit, weights: LiteralWeights, lam) -> np.ndarray:
    grad = [0.0] * circuit.num_vars
    for i, n in enumerate(circuit.nodes):
        if n.kind != "literal":
            continue
        v = abs(n.literal)
        if v in weights.aux:
            continue
        if n.literal > 0:
            grad[v - 1] += lam[i]
        else:
            grad[v - 1] -= lam[i]
    return np.asarray(grad)


def _push_and(lam, i, children, w, scale=None):
    """Reverse step through an AND: adjoint times product of sibling masses."""
    li = lam[i] if scale is None else scale
    if li == 0.0:
        return
    if len(children) == 2:
        a, b = children
        lam[a] += li * w[b]
        lam[b] += li * w[a]
        return
    k = len(children)
    prefix = [1.0] * (k + 1)
    for idx, c in enumerate(children):
        prefix[idx + 1] = prefix[idx] * w[c]
    suffix = 1.0
    for idx in range(k - 1, -1, -1):
        c = children[idx]
        lam[c] += li * prefix[idx] * suffix
        suffix *= w[c]


def wmc_gradient(circuit: Circuit, weights: LiteralWeights) -> np.ndarray:
    """d wmc / d p per variable (probability-mode weights required)."""
    _check_pair(circuit, weights)
    _require_flags(circuit, smooth_needed=not weights.probability_mode)
    if not weights.probability_mode:
        raise StructureError("wmc_gradient needs probability-mode weights")
    w = _wmc_pass(circuit, weights)
    lam = [0.0] * len(circuit.nodes)
    lam[circuit.root] = 1.0
    for i in range(len(circuit.nodes) - 1, -1, -1):
        if lam[i] == 0.0:
            continue
        n = circuit.nodes[i]
        if n.kind == "and":
            _push_and(lam, i, n.children, w)
        elif n.kind == "or":
            for c in n.children:
                lam[c] += lam[i]
    return _literal_grad(circuit, weights, lam)


def entropy_gradient(circuit: Circuit, weights: LiteralWeights) -> np.ndarray:
    """d entropy / d p per variable, by reverse mode over the mass and
    entropy passes jointly.  Finite whenever every node mass is positive;
    at p in {0,1} one-sided derivatives may be infinite."""
    _check_pair(circuit, weights)
    _require_flags(circuit, smooth_needed=True)
    if not weights.probability_mode:
        raise StructureError("entropy_gradient needs probability-mode weights")
    w = _wmc_pass(circuit, weights)
    if w[circuit.root] == 0.0:
        raise ZeroWmcError("constraint has zero probability under the given weights")
    hs = _entropy_pass(circuit, w, False)
    n_nodes = len(circuit.nodes)
    lam_w = [0.0] * n_nodes
    lam_h = [0.0] * n_nodes
    lam_h[circuit.root] = 1.0
    for i in range(n_nodes - 1, -1, -1):
        n = circuit.nodes[i]
        if n.kind == "or":
            wi = w[i]
            lw, lh = lam_w[i], lam_h[i]
            for c in n.children:
                if lw != 0.0:
                    lam_w[c] += lw
                if lh != 0.0 and wi > 0.0:
                    r = w[c] / wi
                    lam_h[c] += lh * r
                    if r > 0.0:
                        lam_w[c] += lh * (hs[c] - math.log(r) - hs[i]) / wi
        elif n.kind == "and":
            _push_and(lam_w, i, n.children, w)
            lh = lam_h[i]
            if lh != 0.0:
                for c in n.children:
                    lam_h[c] += lh
    grad = _literal_grad(circuit, weights, lam_w)
    for v in _iter_bits(_root_missing_bits(circuit)):
        if v in weights.aux:
            continue
        p = weights.w_pos[v]
        grad[v - 1] += _log(1.0 - p) - _log(p)
    return grad


def evaluate(circuit: Circuit, assignment: Mapping[int, bool]) -> bool:
    """Truth value under a total assignment over vars 1..num_vars."""
    missing = [v for v in range(1, circuit.num_vars + 1) if v not in assignment]
    if missing:
        raise StructureError(f"assignment missing variables {missing[:10]}")
    vals = [False] * len(circuit.nodes)
    for i, n in enumerate(circuit.nodes):
        k = n.kind
        if k == "literal":
            vals[i] = bool(assignment[abs(n.literal)]) == (n.literal > 0)
        elif k == "and":
            vals[i] = all(vals[c] for c in n.children)
        elif k == "or":
            vals[i] = any(vals[c] for c in n.children)
        elif k == "true":
            vals[i] = True
    return vals[circuit.root]
