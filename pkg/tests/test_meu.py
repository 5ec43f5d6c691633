import math
import warnings

import numpy as np
import pytest

from conftest import random_connected_graph
from unfold.datasets import ring
from unfold.eval import procrustes_residual
from unfold.graphs import NeighborGraph, knn_graph, laplacian_from_multipliers
from unfold.models.grf import ConvergenceWarning, GrfModel, grf_embed, meu_log_likelihood
from unfold.models.meu import MeuFitConfig, meu_embed, meu_fit, meu_gradient
from unfold.oracle import dense_loglik, fd_gradient
from unfold.spectral import pca, squared_distances

# maximizer of the two-point likelihood (points 0 and 1, gamma 1e-4), found
# by scanning the dense log density over lambda
LAMBDA_STAR_TWO_POINTS = 0.99995


def complete_graph(n):
    return NeighborGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def test_two_point_optimum():
    Y = np.array([[0.0], [1.0]])
    g = complete_graph(2)
    grid = np.linspace(0.9, 1.1, 4001)
    vals = [dense_loglik(Y, laplacian_from_multipliers(g, [t]).toarray() + 1e-4 * np.eye(2))
            for t in grid]
    assert grid[int(np.argmax(vals))] == pytest.approx(LAMBDA_STAR_TWO_POINTS, abs=1e-4)
    m = meu_fit(Y, g, MeuFitConfig(gamma=1e-4))
    assert m.info["multipliers"][0] == pytest.approx(LAMBDA_STAR_TWO_POINTS, abs=1e-3)
    assert m.info["expected"][0] == pytest.approx(1.0, abs=1e-3)


def test_identical_rows_hit_iteration_cap():
    g = complete_graph(4)
    with pytest.warns(ConvergenceWarning, match="did not converge"):
        m = meu_fit(np.ones((4, 2)), g, MeuFitConfig(max_iters=30))
    assert not m.converged


def test_disconnected_graph_rejected():
    g = NeighborGraph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(ValueError, match="disconnected"):
        meu_fit(np.arange(8.0).reshape(4, 2), g)


def test_config_validation():
    with pytest.raises(ValueError):
        MeuFitConfig(gamma=0.0)
    with pytest.raises(ValueError):
        MeuFitConfig(tol=0.0)
    with pytest.raises(ValueError):
        MeuFitConfig(constraint="positive")


def test_gradient_matches_finite_differences_on_ring():
    d = ring(10, noise=0.05, seed=4)
    g = knn_graph(d.Y, 2)
    lam = np.random.default_rng(0).uniform(0.2, 2.0, len(g.edges))

    def f(v):
        return meu_log_likelihood(d.Y, laplacian_from_multipliers(g, v).toarray(), 1e-4)

    num = fd_gradient(f, lam)
    ana = meu_gradient(d.Y, g, lam, 1e-4)
    assert np.abs(ana - num).max() / np.abs(num).max() < 1e-5


def test_loglik_examples(rng):
    val = meu_log_likelihood(np.zeros((2, 1)), np.zeros((2, 2)), 1.0)
    assert val == pytest.approx(-math.log(2 * math.pi))
    g = random_connected_graph(rng, 6, 4)
    L = laplacian_from_multipliers(g, rng.random(len(g.edges))).toarray()
    Y = rng.standard_normal((6, 3))
    base = meu_log_likelihood(np.zeros_like(Y), L, 0.5)
    t1 = meu_log_likelihood(Y, L, 0.5) - base
    t3 = meu_log_likelihood(3 * Y, L, 0.5) - base
    assert t3 == pytest.approx(9 * t1, rel=1e-12)
    assert abs(meu_log_likelihood(Y, L, 0.5) - dense_loglik(Y, L + 0.5 * np.eye(6))) < 1e-8
    with pytest.raises(ValueError):
        meu_log_likelihood(Y, -L, 0.0)


def test_kkt_at_convergence(rng):
    Y = rng.standard_normal((12, 3))
    g = knn_graph(Y, 3)
    cfg = MeuFitConfig(tol=1e-8)
    m = meu_fit(Y, g, cfg)
    assert m.converged
    lam, d, e = m.info["multipliers"], m.info["observed"], m.info["expected"]
    tol = 1e-6 * d.mean()
    active = lam > 0
    assert np.all(np.abs(e[active] - d[active]) <= tol)
    assert np.all(e[~active] <= d[~active] + tol)
    assert np.all(lam >= 0)


def test_full_rank_embedding_reproduces_neighbor_distances(rng):
    Y = rng.standard_normal((9, 2))
    g = knn_graph(Y, 3)
    m = meu_fit(Y, g, MeuFitConfig(tol=1e-8))
    X = meu_embed(m, 8).X
    e = g.edges
    lam = m.info["multipliers"]
    emb = m.p * squared_distances(X)[e[:, 0], e[:, 1]]
    data = squared_distances(Y)[e[:, 0], e[:, 1]]
    active = lam > 0
    assert np.abs(emb - data)[active].max() <= 1e-6 * data.mean()


def test_gamma_only_model_is_isotropic():
    n = 6
    m = GrfModel(np.zeros((n, n)), 0.5, 3, 0.0)
    emb = grf_embed(m, n - 1)
    assert np.allclose(emb.eigenvalues, 2.0)


def test_signed_multipliers_recover_pca(rng):
    Y = rng.standard_normal((20, 5))
    m = meu_fit(Y, complete_graph(20), MeuFitConfig(constraint="none"))
    assert m.converged
    assert procrustes_residual(pca(Y, 5).X, meu_embed(m, 5).X) < 1e-6


def test_nonnegative_fit_keeps_valid_covariance(rng):
    Y = rng.standard_normal((15, 4))
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        m = meu_fit(Y, knn_graph(Y, 4))
    assert np.linalg.eigvalsh(m.precision).min() > 0
    assert np.allclose(m.covariance @ m.precision, np.eye(15), atol=1e-8)
