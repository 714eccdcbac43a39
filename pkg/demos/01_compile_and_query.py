"""Walk through the core pipeline on a three-variable constraint.

We take the rule "if A and B then C", compile it into a circuit whose
structure makes counting tractable, and then read off the constraint
probability, the exact model count, and the entropy of the predictive
distribution restricted to valid outcomes.
"""

from circuitloss import (
    CompileOptions,
    LiteralWeights,
    compile,
    entropy,
    model_count,
    parse_constraint_dsl,
    read_nnf,
    to_cnf,
    wmc,
    wmc_gradient,
    write_nnf,
)

formula, names = parse_constraint_dsl("(implies (and A B) C)")
print("variables:", names)

cnf = to_cnf(formula)
print("clauses:", cnf.clauses)

# decide C at the top so the per-node table mirrors the usual presentation
circuit = compile(cnf, CompileOptions(var_order=[3, 1, 2]))
print(f"circuit: {len(circuit)} nodes, "
      f"decomposable={circuit.decomposable} smooth={circuit.smooth} "
      f"deterministic={circuit.deterministic_by_construction}")

print("models satisfying the rule:", model_count(circuit), "of 8")

# a network believes A with 0.3, B with 0.5, C with 0.2
weights = LiteralWeights.from_probabilities([0.3, 0.5, 0.2])
print("probability the rule holds:", wmc(circuit, weights).value)

result = entropy(circuit, weights, per_node=True)
print("entropy given the rule (nats):", result.value)
print("per-node masses and entropies:")
for node_id, node in enumerate(circuit.nodes):
    mass, h = result.per_node[node_id]
    label = node.literal if node.kind == "literal" else node.kind
    print(f"  node {node_id:2d} {str(label):8s} mass={mass:.4f} H={h:.4f}")

print("d wmc / d p:", wmc_gradient(circuit, weights))

# circuits round-trip through the text format byte for byte
text = write_nnf(circuit)
again = read_nnf(text)
assert write_nnf(again) == text
print("serialized form:", len(text.splitlines()), "lines, round-trips exactly")
