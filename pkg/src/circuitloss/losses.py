"""Differentiable losses built on the circuit queries.

The semantic loss of a probability row p is -ln wmc(circuit, p): zero when
the constraint is certain, growing without bound as its probability under p
vanishes.  The entropy regularizer comes in two flavors: "nesy" uses the
constraint-conditioned entropy, "full" the unconditioned factorized entropy
sum_v H_b(p_v), which ignores the circuit entirely.

combined_objective evaluates w_s * semantic + w_e * entropy per batch row
with exact gradients, isolating per-row failures (zero-mass rows yield an
infinite loss and an error string rather than poisoning the batch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .circuit import Circuit
from .errors import ComputeError, ParseError, ZeroWmcError
from .queries import (
    LiteralWeights,
    entropy,
    entropy_gradient,
    wmc,
    wmc_gradient,
)


@dataclass
class LossBundle:
    value: float
    grad: np.ndarray
    error: Optional[str] = None


@dataclass
class ObjectiveConfig:
    w_semantic: float = 1.0
    w_entropy: float = 0.1
    entropy_kind: str = "nesy"  # "nesy" | "full"

    def __post_init__(self):
        if self.entropy_kind not in ("nesy", "full"):
            raise ValueError(f"unknown entropy_kind {self.entropy_kind!r}")


def _weights_from_row(p: np.ndarray, num_vars: int, aux) -> LiteralWeights:
    return LiteralWeights.from_probabilities(list(p), num_vars, aux)


def semantic_loss(circuit: Circuit, p, aux=()) -> LossBundle:
    """-ln wmc and its gradient; raises ZeroWmcError on zero-mass rows."""
    p = np.asarray(p, dtype=float)
    weights = _weights_from_row(p, circuit.num_vars, aux)
    value = wmc(circuit, weights).value
    if value <= 0.0:
        raise ZeroWmcError("semantic loss undefined: constraint probability is zero")
    g = wmc_gradient(circuit, weights)
    return LossBundle(-math.log(value), -g / value)


def nesy_entropy(circuit: Circuit, p, aux=()) -> LossBundle:
    """Constraint-conditioned entropy and its gradient."""
    p = np.asarray(p, dtype=float)
    weights = _weights_from_row(p, circuit.num_vars, aux)
    value = entropy(circuit, weights).value
    g = entropy_gradient(circuit, weights)
    return LossBundle(value, g)


def full_entropy(circuit: Circuit, p, aux=()) -> LossBundle:
    """Unconditioned factorized entropy sum_v H_b(p_v); the circuit only
    supplies num_vars and the aux set is skipped."""
    p = np.asarray(p, dtype=float)
    weights = _weights_from_row(p, circuit.num_vars, aux)
    value = 0.0
    grad = np.zeros(circuit.num_vars)
    for v in range(1, circuit.num_vars + 1):
        if v in weights.aux:
            continue
        x = weights.w_pos[v]
        if 0.0 < x < 1.0:
            value += -x * math.log(x) - (1.0 - x) * math.log(1.0 - x)
            grad[v - 1] = math.log((1.0 - x) / x)
        else:
            # one-sided slope at the boundary is infinite
            grad[v - 1] = math.inf if x == 0.0 else -math.inf
    return LossBundle(value, grad)


def combined_objective(circuit: Circuit, rows, config: Optional[ObjectiveConfig] = None,
                       aux=()) -> List[LossBundle]:
    """Per-row w_s * semantic_loss + w_e * entropy over a batch.

    Rows with zero constraint probability come back as
    LossBundle(inf, zeros, error=...) so one bad row cannot sink the batch.
    """
    if config is None:
        config = ObjectiveConfig()
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    ent_fn = nesy_entropy if config.entropy_kind == "nesy" else full_entropy
    out = []
    for row in rows:
        try:
            sem = semantic_loss(circuit, row, aux)
            value = config.w_semantic * sem.value
            grad = config.w_semantic * sem.grad
            if config.w_entropy != 0.0:
                ent = ent_fn(circuit, row, aux)
                value += config.w_entropy * ent.value
                grad = grad + config.w_entropy * ent.grad
            out.append(LossBundle(value, grad))
        except (ZeroWmcError, ComputeError, ValueError) as exc:
            out.append(LossBundle(math.inf, np.zeros(circuit.num_vars), str(exc)))
    return out


def parse_batch(text: str) -> np.ndarray:
    """Parse a probability batch: header 'batch <rows> <num_vars>' then one
    whitespace-separated row of num_vars probabilities per line.  '#' starts
    a comment."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    if not lines:
        raise ParseError("empty batch file")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != "batch":
        raise ParseError("expected header 'batch <rows> <num_vars>'", lineno)
    try:
        n_rows, n_vars = int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError("bad counts in batch header", lineno) from None
    if n_rows < 0 or n_vars <= 0:
        raise ParseError("batch header counts must be positive", lineno)
    body = lines[1:]
    if len(body) != n_rows:
        raise ParseError(f"header promises {n_rows} rows, file has {len(body)}")
    rows = np.zeros((n_rows, n_vars))
    for r, (lineno, line) in enumerate(body):
        parts = line.split()
        if len(parts) != n_vars:
            raise ParseError(f"row has {len(parts)} values, expected {n_vars}", lineno)
        try:
            vals = [float(x) for x in parts]
        except ValueError:
            raise ParseError("bad number in batch row", lineno) from None
        for x in vals:
            if math.isnan(x) or not 0.0 <= x <= 1.0:
                raise ParseError(f"probability outside [0,1]: {x}", lineno)
        rows[r] = vals
    return rows


def format_batch(rows) -> str:
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    out = [f"batch {rows.shape[0]} {rows.shape[1]}"]
    for row in rows:
        out.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(out) + "\n"
