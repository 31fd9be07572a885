import numpy as np
import pytest

from ssae.errors import ConfigError, ContractError
from ssae.graph_ssl import (
    AffinityGraph, knn_affinity, label_propagation, label_spreading, spreading_operator,
)
from tests.oracles import knn_bruteforce
from scipy import sparse


def chain():
    # points 0, 1, 3 on a line: with k=1 the middle joins the nearer endpoint,
    # the far endpoint joins the middle, giving the path 0-1-2
    return knn_affinity(np.array([[0.0], [1.0], [3.0]]), 1)


def dense(g):
    return g.adjacency.toarray()


def test_collinear_path():
    a = dense(chain())
    np.testing.assert_array_equal(a, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])


def test_symmetric_no_self_loops(np_rng):
    g = knn_affinity(np_rng.normal(size=(40, 5)), 4)
    a = dense(g)
    assert g.symmetric and np.allclose(a, a.T)
    assert (np.diag(a) == 0).all()
    assert set(np.unique(a)) <= {0.0, 1.0}


def test_duplicate_points_allowed():
    g = knn_affinity(np.array([[1.0, 1.0], [1.0, 1.0], [5.0, 5.0]]), 1)
    assert dense(g)[0, 1] == 1


def test_knn_matches_bruteforce(np_rng):
    x = np_rng.normal(size=(50, 3))
    k = 4
    g = knn_affinity(x, k)
    lists = knn_bruteforce(x, k)
    expected = np.zeros((50, 50))
    for i, nb in enumerate(lists):
        expected[i, nb] = 1
    expected = np.maximum(expected, expected.T)
    np.testing.assert_array_equal(dense(g), expected)
    assert sorted(g.neighbors(0).tolist()) == sorted(np.flatnonzero(expected[0]).tolist())


def test_knn_too_many_neighbors():
    with pytest.raises(ConfigError):
        knn_affinity(np.zeros((3, 2)), 3)


def test_propagation_chain_fixed_point():
    ld = label_propagation(chain(), [0, -1, 1], tol=1e-6)
    # middle node averages its two clamped neighbours
    np.testing.assert_allclose(ld.f[1], [0.5, 0.5], atol=1e-6)
    assert ld.predict()[1] == 0
    np.testing.assert_array_equal(ld.f[[0, 2]], [[1, 0], [0, 1]])


def test_propagation_all_labeled(np_rng):
    g = knn_affinity(np_rng.normal(size=(10, 2)), 3)
    y = np.array([0, 1] * 5)
    ld = label_propagation(g, y)
    np.testing.assert_array_equal(ld.f, np.eye(2)[y])


def test_propagation_fully_connected_symmetric():
    a = np.ones((4, 4)) - np.eye(4)
    g = AffinityGraph(sparse.csr_matrix(a))
    ld = label_propagation(g, [0, 1, -1, -1], tol=1e-10)
    np.testing.assert_allclose(ld.f[2:], 0.5, atol=1e-9)
    assert ld.converged


def test_propagation_unreachable_uniform():
    a = np.zeros((4, 4))
    a[0, 1] = a[1, 0] = 1
    a[2, 3] = a[3, 2] = 1
    g = AffinityGraph(sparse.csr_matrix(a))
    ld = label_propagation(g, [0, 1, -1, -1])
    np.testing.assert_allclose(ld.f[2:], 0.5)
    assert ld.unreachable.tolist() == [False, False, True, True]


def test_needs_every_class():
    with pytest.raises(ContractError):
        label_propagation(chain(), [0, -1, -1], k=2)


def test_spreading_chain_closed_form():
    g = chain()
    alpha = 0.8
    y0 = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    s = spreading_operator(g).toarray()
    closed = (1 - alpha) * np.linalg.solve(np.eye(3) - alpha * s, y0)
    ld = label_spreading(g, [0, -1, 1], alpha=alpha, tol=1e-12)
    np.testing.assert_allclose(ld.raw, closed, atol=1e-6)
    np.testing.assert_allclose(ld.f, closed / closed.sum(axis=1, keepdims=True), atol=1e-6)


def test_spreading_small_alpha_uniform_on_unlabeled():
    # with alpha -> 0 unlabeled rows carry almost no mass and renormalize to ~uniform
    ld = label_spreading(chain(), [0, -1, 1], alpha=1e-9, tol=1e-15)
    np.testing.assert_allclose(ld.f[1], [0.5, 0.5], atol=1e-6)


def test_spreading_alpha_range():
    with pytest.raises(ContractError):
        label_spreading(chain(), [0, -1, 1], alpha=1.0)


def test_two_clusters_adopt_seed_labels(np_rng):
    x = np.vstack([np_rng.normal(-5, 0.5, size=(15, 2)), np_rng.normal(5, 0.5, size=(15, 2))])
    y = -np.ones(30, dtype=int)
    y[0], y[15] = 0, 1
    g = knn_affinity(x, 4)
    for ld in (label_propagation(g, y, tol=1e-8), label_spreading(g, y, tol=1e-8)):
        assert ld.predict().tolist() == [0] * 15 + [1] * 15
        np.testing.assert_allclose(ld.f.sum(axis=1), 1.0, atol=1e-9)
        assert (ld.f >= 0).all()


def test_permutation_equivariance(np_rng):
    x = np_rng.normal(size=(30, 3))
    y = -np.ones(30, dtype=int)
    y[:6] = [0, 1, 0, 1, 0, 1]
    perm = np_rng.permutation(30)
    inv = np.argsort(perm)
    for method in (label_propagation, label_spreading):
        base = method(knn_affinity(x, 5), y, tol=1e-9).f
        moved = method(knn_affinity(x[perm], 5), y[perm], tol=1e-9).f
        np.testing.assert_allclose(moved[inv], base, atol=1e-12)


def test_residual_goes_below_tol(np_rng):
    x = np_rng.normal(size=(60, 2))
    y = -np.ones(60, dtype=int)
    y[:4] = [0, 1, 0, 1]
    g = knn_affinity(x, 6)
    assert label_propagation(g, y, tol=1e-6).converged
    assert label_spreading(g, y, tol=1e-6).converged
