import numpy as np
import pytest

from clusterfx.effects import averaging_matrix, decompose, estimate_p
from clusterfx.errors import DimensionMismatch
from clusterfx.oracles import pairwise_w_bruteforce

from conftest import random_studies, study


def test_identical_cells_give_half():
    cells = {(g, l): [[1, 2, 2, 5]] for g in (1, 2, 3) for l in (1, 2)}
    est = estimate_p(study(3, cells))
    np.testing.assert_array_equal(est.p_hat, np.full(6, 0.5))


def test_two_cell_hand_value():
    est = estimate_p(study(1, {(1, 1): [[1, 2]], (1, 2): [[3, 4]]}))
    np.testing.assert_array_equal(est.p_hat, [0.25, 0.75])
    assert est.N == 4
    assert est.T == 1


def test_p_is_column_mean_of_oracle_w():
    for data in random_studies(30, seed=7, T_choices=(3,)):
        est = estimate_p(data)
        oracle = pairwise_w_bruteforce(data).mean(axis=0)
        assert np.abs(est.p_hat - oracle).max() <= 1e-12


def test_averaging_matrix_shape():
    E = averaging_matrix(4)
    assert E.shape == (4, 16)
    np.testing.assert_allclose(E.sum(axis=1), 1.0)


def test_mean_is_half():
    for data in random_studies(200, seed=8):
        assert abs(estimate_p(data).p_hat.mean() - 0.5) <= 1e-12


def test_decompose_trivial_cases():
    d = decompose(np.full(6, 0.5), 3)
    assert not d.alpha.any() and not d.beta.any() and not d.alphabeta.any()
    d = decompose([0.4, 0.6, 0.4, 0.6], 2)
    np.testing.assert_allclose(d.alpha, [0, 0], atol=1e-15)
    np.testing.assert_allclose(d.beta, [-0.1, 0.1], atol=1e-15)
    np.testing.assert_allclose(d.alphabeta, 0, atol=1e-15)


def test_decompose_side_conditions_and_reconstruction():
    rng = np.random.default_rng(9)
    for T in (1, 2, 3, 5):
        p = rng.random(2 * T)
        d = decompose(p, T)
        assert abs(d.alpha.sum()) <= 1e-15
        assert abs(d.beta.sum()) <= 1e-15
        assert np.abs(d.alphabeta.sum(axis=0)).max() <= 1e-15
        assert np.abs(d.alphabeta.sum(axis=1)).max() <= 1e-15
        # reconstruction adds back 1/2, which equals the grand mean only for estimated p
        grid = p.reshape(T, 2)
        np.testing.assert_allclose(d.reconstruct() - 0.5 + grid.mean(), grid, atol=1e-14)


def test_decompose_reconstructs_estimates_exactly():
    for data in random_studies(30, seed=10):
        est = estimate_p(data)
        d = decompose(est.p_hat, data.T)
        assert np.abs(d.reconstruct().ravel() - est.p_hat).max() <= 1e-14


def test_decompose_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        decompose(np.zeros(5), 3)


def test_column_mean_equals_averaging_matrix_route():
    for data in random_studies(20, seed=11):
        est = estimate_p(data)
        K = est.p_hat.size
        via_kron = averaging_matrix(K) @ est.W_hat.W.reshape(-1)
        assert np.abs(est.p_hat - via_kron).max() <= 1e-15
