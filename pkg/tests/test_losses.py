import math

import numpy as np
import pytest

from circuitloss import (
    CnfFormula,
    LossBundle,
    ObjectiveConfig,
    ParseError,
    ZeroWmcError,
    combined_objective,
    compile,
    exactly_one,
    format_batch,
    full_entropy,
    nesy_entropy,
    parse_batch,
    semantic_loss,
)
from circuitloss.oracle import finite_diff

from helpers import cnf_models, conditioned_entropy, random_probs, random_satisfiable_cnf, weighted_sum


def _compiled(rng, **kw):
    n, clauses = random_satisfiable_cnf(rng, **kw)
    return n, clauses, compile(CnfFormula(n, clauses))


def test_semantic_loss_value_and_gradient():
    rng = np.random.default_rng(61)
    for _ in range(10):
        n, clauses, c = _compiled(rng, max_vars=7, max_clauses=12)
        p = random_probs(rng, n)
        bundle = semantic_loss(c, p)
        expected = -math.log(weighted_sum(cnf_models(n, clauses), p))
        assert bundle.value == pytest.approx(expected, abs=1e-12)
        fd = finite_diff(lambda q: semantic_loss(c, q).value, p)
        assert np.max(np.abs(bundle.grad - fd)) < 1e-6


def test_semantic_loss_zero_mass_raises():
    c = exactly_one(2)
    with pytest.raises(ZeroWmcError):
        semantic_loss(c, [1.0, 1.0])


def test_nesy_entropy_bundle():
    rng = np.random.default_rng(67)
    n, clauses, c = _compiled(rng, max_vars=6, max_clauses=10)
    p = random_probs(rng, n, 0.2, 0.8)
    bundle = nesy_entropy(c, p)
    assert bundle.value == pytest.approx(
        conditioned_entropy(cnf_models(n, clauses), p), abs=1e-12)
    fd = finite_diff(lambda q: nesy_entropy(c, q).value, p)
    assert np.max(np.abs(bundle.grad - fd)) < 1e-6


def test_full_entropy_closed_form():
    c = exactly_one(3)
    p = np.array([0.2, 0.5, 0.9])
    bundle = full_entropy(c, p)
    expected = sum(-x * math.log(x) - (1 - x) * math.log(1 - x) for x in p)
    assert bundle.value == pytest.approx(expected)
    assert bundle.grad[1] == pytest.approx(0.0)
    assert bundle.grad[0] == pytest.approx(math.log(0.8 / 0.2))


def test_full_entropy_boundary_gradient():
    c = exactly_one(2)
    bundle = full_entropy(c, [0.0, 1.0])
    assert bundle.value == 0.0
    assert bundle.grad[0] == math.inf and bundle.grad[1] == -math.inf


def test_combined_objective_weighted_sum():
    c = exactly_one(3)
    p = [0.2, 0.3, 0.4]
    cfg = ObjectiveConfig(w_semantic=2.0, w_entropy=0.5, entropy_kind="nesy")
    bundle = combined_objective(c, p, cfg)[0]
    sem = semantic_loss(c, p)
    ent = nesy_entropy(c, p)
    assert bundle.value == pytest.approx(2.0 * sem.value + 0.5 * ent.value)
    assert np.allclose(bundle.grad, 2.0 * sem.grad + 0.5 * ent.grad)


def test_combined_objective_full_kind():
    c = exactly_one(2)
    p = [0.3, 0.6]
    cfg = ObjectiveConfig(1.0, 0.1, "full")
    bundle = combined_objective(c, p, cfg)[0]
    assert bundle.value == pytest.approx(
        semantic_loss(c, p).value + 0.1 * full_entropy(c, p).value)


def test_combined_objective_isolates_bad_rows():
    c = exactly_one(2)
    rows = [[0.3, 0.6], [1.0, 1.0], [0.5, 0.5]]
    out = combined_objective(c, rows)
    assert out[0].error is None and out[2].error is None
    assert out[1].error is not None
    assert out[1].value == math.inf
    assert np.array_equal(out[1].grad, np.zeros(2))


def test_combined_objective_zero_entropy_weight_skips_entropy():
    # rows at certainty have zero conditioned entropy variance issues;
    # with w_entropy=0 only the semantic term is evaluated
    c = exactly_one(2)
    out = combined_objective(c, [[1.0, 0.0]], ObjectiveConfig(1.0, 0.0))
    assert out[0].error is None
    assert out[0].value == pytest.approx(0.0)


def test_objective_config_validates_kind():
    with pytest.raises(ValueError):
        ObjectiveConfig(entropy_kind="mystery")


def test_batch_round_trip():
    rows = np.array([[0.1, 0.2, 0.3], [0.9, 0.8, 0.7]])
    again = parse_batch(format_batch(rows))
    assert np.array_equal(rows, again)


def test_parse_batch_errors():
    with pytest.raises(ParseError):
        parse_batch("")
    with pytest.raises(ParseError):
        parse_batch("batch 2 2\n0.1 0.2\n")  # row count mismatch
    with pytest.raises(ParseError):
        parse_batch("batch 1 2\n0.1\n")  # row width
    with pytest.raises(ParseError):
        parse_batch("batch 1 1\n1.5\n")  # outside [0,1]
    with pytest.raises(ParseError):
        parse_batch("rows 1 1\n0.5\n")  # bad header


def test_parse_batch_comments_and_vector_format():
    rows = parse_batch("# header comment\nbatch 1 2\n0.25 0.75 # inline\n")
    assert rows.shape == (1, 2)
    assert format_batch([0.25, 0.75]).startswith("batch 1 2\n")
