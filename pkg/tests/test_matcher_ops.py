import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sirforge.errors import DegenerateBatch, EmptyNeighborhood, ShapeMismatch
from sirforge.matcher import (
    AlignmentBatch,
    align_hybrid,
    align_independent,
    align_structural,
    contrastive_loss,
    similarity,
)


def unit_rows(rng, n, d):
    m = rng.standard_normal((n, d))
    return m / np.linalg.norm(m, axis=1, keepdims=True)


# -- alignment mechanisms -----------------------------------------------------


def test_independent_is_identity(rng):
    p, x = unit_rows(rng, 4, 8), unit_rows(rng, 4, 8)
    lhs, rhs = align_independent(p, x)
    assert lhs is p and rhs is x  # bitwise passthrough


def test_independent_single_row(rng):
    p, x = unit_rows(rng, 1, 8), unit_rows(rng, 1, 8)
    lhs, rhs = align_independent(p, x)
    assert np.array_equal(lhs, p) and np.array_equal(rhs, x)


def test_independent_diagonal_equals_rowwise_dots(rng, toy_model):
    p, x = unit_rows(rng, 4, 8), unit_rows(rng, 4, 8)
    toy_model.tau_match = 0.0
    gamma = similarity(toy_model, *align_independent(p, x))
    expected = [float(np.dot(p[i], x[i])) for i in range(4)]
    assert np.allclose(np.diag(gamma), expected, atol=1e-12)


def test_structural_singleton_neighborhood_is_identity(rng):
    p, x = unit_rows(rng, 3, 8), unit_rows(rng, 3, 8)
    nbrs = {i: (i,) for i in range(3)}
    _, rhs = align_structural(p, x, nbrs)
    assert np.allclose(rhs, x)


def test_structural_hand_mean(rng):
    p, x = unit_rows(rng, 3, 8), unit_rows(rng, 3, 8)
    nbrs = {0: (0,), 1: (0, 2), 2: (2,)}
    _, rhs = align_structural(p, x, nbrs)
    assert np.allclose(rhs[1], (x[0] + x[2]) / 2.0)


def test_structural_identical_rows(rng):
    row = unit_rows(rng, 1, 8)
    x = np.repeat(row, 5, axis=0)
    p = unit_rows(rng, 5, 8)
    _, rhs = align_structural(p, x, {i: (max(0, i - 1), i) for i in range(5)})
    assert np.allclose(rhs, x)


def test_hybrid_lhs_is_snippets_rhs_is_node_means(rng):
    p, x = unit_rows(rng, 3, 8), unit_rows(rng, 3, 8)
    nbrs = {0: (1,), 1: (0, 2), 2: (1,)}
    lhs, rhs = align_hybrid(p, x, nbrs)
    assert np.array_equal(lhs, x)
    assert np.allclose(rhs[1], (p[0] + p[2]) / 2.0)  # chain 0-1-2 hand mean
    assert np.allclose(rhs[0], p[1])  # singleton parent neighborhood


def test_hybrid_star_tree_identical_rows(rng):
    p, x = unit_rows(rng, 4, 8), unit_rows(rng, 4, 8)
    nbrs = {i: (0,) for i in range(4)}  # every leaf's neighborhood is the root
    _, rhs = align_hybrid(p, x, nbrs)
    for i in range(4):
        assert np.allclose(rhs[i], p[0])


def test_empty_neighborhood_raises(rng):
    p, x = unit_rows(rng, 2, 8), unit_rows(rng, 2, 8)
    with pytest.raises(EmptyNeighborhood):
        align_structural(p, x, {0: (), 1: (1,)})


def test_shape_mismatch_raises(rng, toy_model):
    with pytest.raises(ShapeMismatch):
        align_independent(unit_rows(rng, 2, 8), unit_rows(rng, 2, 4))
    with pytest.raises(ShapeMismatch):
        similarity(toy_model, unit_rows(rng, 2, 8), unit_rows(rng, 2, 6))


# -- similarity ----------------------------------------------------------------


def test_similarity_identity_at_tau_zero(toy_model):
    eye = np.eye(4)
    toy_model.tau_match = 0.0
    assert np.allclose(similarity(toy_model, eye, eye), np.eye(4))


def test_similarity_scales_by_exp_tau(toy_model):
    eye = np.eye(4)
    toy_model.tau_match = math.log(2.0)
    assert np.allclose(similarity(toy_model, eye, eye), 2.0 * np.eye(4), atol=1e-12)
    toy_model.tau_match = 0.0


def test_similarity_antipodal_diagonal(toy_model):
    toy_model.tau_match = 0.0
    lhs = np.eye(3)
    rhs = -np.eye(3)
    gamma = similarity(toy_model, lhs, rhs)
    assert np.allclose(np.diag(gamma), -1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.1, max_value=5.0))
def test_tau_shift_multiplies_gamma(c):
    from sirforge.matcher import EncoderConfig, MatchModel, train_tokenizer

    tok = train_tokenizer(["ab"], vocab_size=260)
    model = MatchModel(
        EncoderConfig(layers=1, heads=1, model_dim=4, ffn_dim=4, max_seq=8, dtype="float64"),
        tok,
    )
    rng = np.random.default_rng(0)
    lhs, rhs = unit_rows(rng, 3, 4), unit_rows(rng, 3, 4)
    model.tau_match = 0.3
    base = similarity(model, lhs, rhs)
    model.tau_match = 0.3 + math.log(c)
    scaled = similarity(model, lhs, rhs)
    assert np.max(np.abs(scaled - c * base)) < 1e-9


# -- loss ----------------------------------------------------------------------


def test_saturated_diagonal_loss_vanishes(toy_model):
    gammas = [100.0 * np.eye(5) for _ in range(3)]
    assert contrastive_loss(toy_model, gammas) < 1e-6


def test_uniform_gamma_loss_is_lambda_weighted_log_n(toy_model):
    for n in (2, 3, 7):
        gammas = [np.zeros((n, n)) for _ in range(3)]
        expected = float(toy_model.lam.sum()) * math.log(n)
        assert abs(contrastive_loss(toy_model, gammas) - expected) < 1e-9


def test_constant_gamma_equals_uniform(toy_model):
    gammas = [np.full((4, 4), 3.7) for _ in range(3)]
    expected = float(toy_model.lam.sum()) * math.log(4)
    assert abs(contrastive_loss(toy_model, gammas) - expected) < 1e-9


def test_transposition_symmetry_exact(rng, toy_model):
    gammas = [rng.standard_normal((6, 6)) for _ in range(3)]
    forward = contrastive_loss(toy_model, gammas)
    flipped = contrastive_loss(toy_model, [g.T for g in gammas])
    assert forward == flipped


def test_loss_nonnegative_on_random_matrices(rng, toy_model):
    for _ in range(20):
        gammas = [rng.standard_normal((4, 4)) * 3 for _ in range(3)]
        assert contrastive_loss(toy_model, gammas) >= 0.0


def test_degenerate_batch_rejected(toy_model):
    with pytest.raises(DegenerateBatch):
        contrastive_loss(toy_model, [np.zeros((1, 1))] * 3)


def test_lambda_weighting(toy_model):
    gammas = [np.zeros((2, 2))] * 3
    old = toy_model.lam.copy()
    toy_model.lam = np.array([2.0, 0.0, 1.0])
    try:
        assert abs(contrastive_loss(toy_model, gammas) - 3.0 * math.log(2)) < 1e-12
    finally:
        toy_model.lam = old


# -- batch container -----------------------------------------------------------


def test_alignment_batch_validation():
    with pytest.raises(DegenerateBatch):
        AlignmentBatch.from_statements(["one"], ["uno"])
    with pytest.raises(ShapeMismatch):
        AlignmentBatch.from_statements(["a", "b"], ["x"])
    batch = AlignmentBatch.from_statements(["a", "b", "c"], ["x", "y", "z"])
    assert batch.seq_neighbors[0] == (0, 1)
    assert batch.seq_neighbors[1] == (0, 1, 2)
    assert batch.tree_neighbors[1] == (0, 2)
    assert batch.tree_neighbors[0] == (1,)
