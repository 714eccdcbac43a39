"""Acceptance gate.

One test per acceptance criterion, each asserting the stated tolerance and
budget.  Reference values for the worked example (the three-variable
implication (A and B) -> C at weights 0.3/0.5/0.2) are frozen here; the
random corpora are checked against the independent oracles in helpers.py and
oracle.py, never against stored outputs.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from circuitloss import (
    CnfFormula,
    CompileOptions,
    LiteralWeights,
    compile,
    entropy,
    entropy_gradient,
    exactly_one,
    grid_simple_paths,
    model_count,
    one_hot_blocks,
    ontology_constraint,
    parse_constraint_dsl,
    to_cnf,
    total_order,
    wmc,
    wmc_gradient,
)
from circuitloss import GridSpec, OntologySpec
from circuitloss.oracle import (
    brute_entropy,
    brute_wmc,
    check_determinism_exhaustive,
    enumerate_models,
    finite_diff,
)

from helpers import grid_path_count, random_probs, random_satisfiable_cnf

WORKED_DSL = "(implies (and A B) C)"
WORKED_P = [0.3, 0.5, 0.2]
# printed reference values for the worked example: rounded to 3 and 5
# significant figures respectively, hence the relative tolerances below
WORKED_WMC = 0.88
WORKED_ENTROPY_2DP = 1.64
WORKED_ENTROPY_4DP = 1.6349
WORKED_NODE_ENTROPIES = (0.61, 0.69, 1.30, 1.04)


@pytest.fixture(scope="module")
def corpus():
    """200 satisfiable random CNFs (<= 12 vars, <= 30 clauses), compiled,
    each with a random probability vector.  Build time is recorded so the
    consuming criteria can count it against their budgets."""
    rng = np.random.default_rng(20260823)
    t0 = time.perf_counter()
    items = []
    while len(items) < 200:
        n, clauses = random_satisfiable_cnf(rng, max_vars=12, max_clauses=30)
        circuit = compile(CnfFormula(n, clauses))
        items.append((n, clauses, circuit, random_probs(rng, n)))
    return {"items": items, "build_seconds": time.perf_counter() - t0}


@pytest.fixture(scope="module")
def grids():
    t0 = time.perf_counter()
    built = {
        (2, 2): grid_simple_paths(GridSpec(2, 2)),
        (3, 3): grid_simple_paths(GridSpec(3, 3)),
        (4, 4): grid_simple_paths(GridSpec(4, 4)),
    }
    return {"circuits": built, "build_seconds": time.perf_counter() - t0}


def test_worked_example_reference_values():
    t0 = time.perf_counter()
    formula, names = parse_constraint_dsl(WORKED_DSL)
    assert names == {"A": 1, "B": 2, "C": 3}
    # decide C first so the per-node table exposes the annotated entropies
    circuit = compile(to_cnf(formula), CompileOptions(var_order=[3, 1, 2]))
    weights = LiteralWeights.from_probabilities(WORKED_P)

    value = wmc(circuit, weights).value
    assert abs(value - WORKED_WMC) <= 1e-12

    result = entropy(circuit, weights, per_node=True)
    oracle = brute_entropy(enumerate_models(circuit), weights)
    assert abs(result.value - oracle) <= 1e-9
    assert abs(result.value - WORKED_ENTROPY_2DP) / WORKED_ENTROPY_2DP <= 5e-3
    assert abs(WORKED_ENTROPY_4DP - oracle) / oracle <= 1e-3

    node_entropies = [h for _, h in result.per_node.values()]
    for target in WORKED_NODE_ENTROPIES:
        assert any(abs(h - target) <= 5e-3 for h in node_entropies), target

    assert time.perf_counter() - t0 < 1.0


def test_oracle_equivalence_random_corpus(corpus):
    t0 = time.perf_counter()
    for n, clauses, circuit, p in corpus["items"]:
        weights = LiteralWeights.from_probabilities(list(p))
        models = enumerate_models(CnfFormula(n, clauses))
        expected_w = brute_wmc(models, weights)
        got_w = wmc(circuit, weights).value
        assert abs(got_w - expected_w) / expected_w <= 1e-9
        expected_h = brute_entropy(models, weights)
        got_h = entropy(circuit, weights).value
        assert abs(got_h - expected_h) <= 1e-9
    elapsed = corpus["build_seconds"] + (time.perf_counter() - t0)
    assert elapsed < 60.0


def test_uniform_entropy_equals_log_model_count(corpus):
    for n, clauses, circuit, _ in corpus["items"]:
        uniform = LiteralWeights.uniform(n)
        count = model_count(circuit)
        assert count > 0
        got = entropy(circuit, uniform).value
        assert abs(got - math.log(count)) <= 1e-9


def _assert_gradient_tolerance(analytic, numeric):
    for g, f in zip(analytic, numeric):
        if abs(g) < 1e-3:
            assert abs(g - f) <= 1e-7
        else:
            assert abs(g - f) / abs(g) <= 1e-4


def test_gradient_finite_difference_checks(corpus):
    rng = np.random.default_rng(77)
    instances = corpus["items"][:50]
    for n, clauses, circuit, _ in instances:
        p = random_probs(rng, n, 0.1, 0.9)
        weights = LiteralWeights.from_probabilities(list(p))

        gw = wmc_gradient(circuit, weights)
        fw = finite_diff(
            lambda q: wmc(circuit,
                          LiteralWeights.from_probabilities(list(q))).value,
            p, h=1e-5)
        _assert_gradient_tolerance(gw, fw)

        gh = entropy_gradient(circuit, weights)
        fh = finite_diff(
            lambda q: entropy(circuit,
                              LiteralWeights.from_probabilities(list(q))).value,
            p, h=1e-5)
        _assert_gradient_tolerance(gh, fh)


def test_builder_model_counts(grids):
    t0 = time.perf_counter()
    for n in range(1, 11):
        assert model_count(exactly_one(n)) == n
    for n in (3, 4, 5):
        assert model_count(compile(total_order(n))) == math.factorial(n)
    assert model_count(grids["circuits"][(2, 2)]) == 12
    assert model_count(grids["circuits"][(3, 3)]) == grid_path_count(3, 3)
    assert model_count(grids["circuits"][(4, 4)]) == grid_path_count(4, 4)
    elapsed = grids["build_seconds"] + (time.perf_counter() - t0)
    assert elapsed < 120.0


def _built_circuits(grids):
    tiny = OntologySpec(("PER", "ORG"), (("WORKS_FOR", "PER", "ORG"),), 2,
                        ((1, 2),))
    out = [exactly_one(n) for n in range(1, 11)]
    out.append(one_hot_blocks([2, 3, 4]))
    out.extend(grids["circuits"].values())
    out.extend(compile(total_order(n)) for n in (3, 4, 5))
    out.append(compile(ontology_constraint(tiny)))
    formula, _ = parse_constraint_dsl(WORKED_DSL)
    out.append(compile(to_cnf(formula)))
    return out


def test_structural_guarantees_corpus(corpus, grids):
    everything = [c for _, _, c, _ in corpus["items"]] + _built_circuits(grids)
    for circuit in everything:
        assert circuit.decomposable, "decomposability flag"
        assert circuit.smooth, "smoothness flag"
        if circuit.num_vars <= 16:
            assert check_determinism_exhaustive(circuit).ok


def test_log_space_robustness_128_vars():
    blocks = [8] * 16
    circuit = one_hot_blocks(blocks)
    assert circuit.num_vars == 128
    rng = np.random.default_rng(101)
    p = rng.uniform(1.0, 9.0, 128) * 1e-25
    weights = LiteralWeights.from_probabilities(list(p))

    linear = wmc(circuit, weights).value
    assert linear == 0.0  # underflows: the linear path cannot represent it

    got = wmc(circuit, weights, log_space=True).value
    analytic = 0.0
    start = 0
    for size in blocks:
        block = p[start:start + size]
        mass = sum(block[i] * np.prod([1.0 - q for j, q in enumerate(block)
                                       if j != i])
                   for i in range(size))
        analytic += math.log(float(mass))
        start += size
    assert abs(got - analytic) / abs(analytic) <= 1e-9


def test_cli_byte_identical_outputs(tmp_path):
    dsl = tmp_path / "c.dsl"
    dsl.write_text(WORKED_DSL + "\n")
    weights = tmp_path / "w.txt"
    weights.write_text("1 0.3\n2 0.5\n3 0.2\n")
    nnf_a = tmp_path / "a.nnf"
    nnf_b = tmp_path / "b.nnf"

    def run(*args):
        r = subprocess.run([sys.executable, "-m", "circuitloss", *args],
                           capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        return r.stdout

    run("compile", "--dsl", str(dsl), "-o", str(nnf_a))
    run("compile", "--dsl", str(dsl), "-o", str(nnf_b))
    assert nnf_a.read_bytes() == nnf_b.read_bytes()

    invocations = [
        ("wmc", "-c", str(nnf_a), "-w", str(weights)),
        ("wmc", "-c", str(nnf_a), "-w", str(weights), "--log-space"),
        ("entropy", "-c", str(nnf_a), "-w", str(weights), "--per-node"),
        ("count", "-c", str(nnf_a)),
        ("grad", "-c", str(nnf_a), "-w", str(weights), "--of", "wmc"),
        ("grad", "-c", str(nnf_a), "-w", str(weights), "--of", "entropy"),
        ("check", "-c", str(nnf_a), "--exhaustive-determinism"),
    ]
    for args in invocations:
        assert run(*args) == run(*args)
