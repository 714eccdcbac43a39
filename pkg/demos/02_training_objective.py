"""Use the losses as a drop-in training signal.

A mock classifier predicts independent probabilities for A, B, C under the
rule "if A and B then C".  Gradient descent on semantic loss alone drives
the constraint probability to 1 but happily parks on an interior,
non-committal prediction: the rule admits many models and semantic loss
does not care which.  Adding the conditioned-entropy term makes the output
commit to a single model.  The full-entropy variant also commits, but its
regularizer ignores the constraint while doing so.
"""

import numpy as np

from circuitloss import (
    LiteralWeights,
    ObjectiveConfig,
    combined_objective,
    compile,
    entropy,
    parse_constraint_dsl,
    to_cnf,
    wmc,
)

formula, _ = parse_constraint_dsl("(implies (and A B) C)")
circuit = compile(to_cnf(formula))


def descend(p, config, steps=600, lr=0.05):
    p = np.array(p, dtype=float)
    for _ in range(steps):
        bundle = combined_objective(circuit, p, config)[0]
        if bundle.error is not None:
            raise RuntimeError(bundle.error)
        p = np.clip(p - lr * bundle.grad, 1e-4, 1 - 1e-4)
    return p


p0 = [0.6, 0.5, 0.4]
print("start p(A,B,C) =", p0)
for label, config in [
    ("semantic only      ", ObjectiveConfig(1.0, 0.0)),
    ("semantic + nesy ent", ObjectiveConfig(1.0, 0.25, "nesy")),
    ("semantic + full ent", ObjectiveConfig(1.0, 0.25, "full")),
]:
    p = descend(p0, config)
    weights = LiteralWeights.from_probabilities(list(p))
    print(f"{label}: p={np.round(p, 3)} "
          f"constraint probability={wmc(circuit, weights).value:.4f} "
          f"conditioned entropy={entropy(circuit, weights).value:.4f}")

print()
print("batched evaluation with one infeasible row:")
rows = np.array([[0.6, 0.5, 0.4], [1.0, 1.0, 0.0]])  # row 1 forces A,B and not C
for i, bundle in enumerate(combined_objective(circuit, rows)):
    if bundle.error is not None:
        print(f"  row {i}: masked ({bundle.error})")
    else:
        print(f"  row {i}: loss={bundle.value:.4f}")
