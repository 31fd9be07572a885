import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssae.errors import ContractError
from ssae.numerics import Rng, matmul, permutation, row_slice, sample_gaussian


def naive_matmul(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            s = 0.0
            for t in range(a.shape[1]):
                s += a[i, t] * b[t, j]
            out[i, j] = s
    return out


def test_matmul_identity():
    assert matmul([[1, 0], [0, 1]], [[3, 4], [5, 6]]).tolist() == [[3, 4], [5, 6]]


def test_matmul_dot():
    assert matmul([[1, 2]], [[3], [4]]).tolist() == [[11]]


def test_matmul_matches_triple_loop(np_rng):
    a = np_rng.normal(size=(5, 7))
    b = np_rng.normal(size=(7, 3))
    np.testing.assert_allclose(matmul(a, b), naive_matmul(a, b), rtol=0, atol=1e-12)


def test_matmul_dimension_mismatch():
    with pytest.raises(ContractError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_associative(np_rng):
    for _ in range(20):
        a, b, c = (np_rng.normal(size=s) for s in [(3, 4), (4, 5), (5, 2)])
        assert np.abs(matmul(matmul(a, b), c) - matmul(a, matmul(b, c))).max() < 1e-9


def test_gaussian_degenerate():
    m = sample_gaussian(Rng(0), 3, 4, mean=2.5, std=0)
    assert (m == 2.5).all()


def test_gaussian_deterministic():
    np.testing.assert_array_equal(sample_gaussian(Rng(42), 4, 4), sample_gaussian(Rng(42), 4, 4))


def test_gaussian_moments():
    m = sample_gaussian(Rng(7), 1000, 1000, mean=0.0, std=1.0)
    assert -0.01 <= m.mean() <= 0.01
    assert abs(m.std() - 1.0) < 0.01
    m = sample_gaussian(Rng(8), 1000, 1000, mean=3.0, std=2.0)
    assert abs(m.mean() - 3.0) < 0.03 and abs(m.std() - 2.0) < 0.02


def test_gaussian_negative_std():
    with pytest.raises(ContractError):
        sample_gaussian(Rng(0), 1, 1, std=-1)


def test_permutation_single():
    assert permutation(Rng(0), 1).tolist() == [0]


def test_permutation_uniform():
    rng = Rng(99)
    counts = Counter(tuple(permutation(rng, 3)) for _ in range(100_000))
    assert set(counts) == set(itertools.permutations(range(3)))
    for c in counts.values():
        assert abs(c / 100_000 - 1 / 6) < 0.01


def test_permutation_deterministic():
    assert permutation(Rng(5), 50).tolist() == permutation(Rng(5), 50).tolist()


def test_child_streams_independent_of_parent_usage():
    a = Rng(3)
    a.normal(10)
    assert a.child(1).normal(5).tolist() == Rng(3).child(1).normal(5).tolist()


def test_row_slice():
    m = np.array([[1.0], [2.0], [3.0]])
    np.testing.assert_array_equal(row_slice(m, [0, 1, 2]), m)
    assert row_slice(m, [2, 0]).tolist() == [[3], [1]]
    assert row_slice([[1.0], [2.0]], [0, 0]).tolist() == [[1], [1]]
    with pytest.raises(ContractError):
        row_slice(m, [3])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 40))
def test_permutation_is_permutation(seed, n):
    assert sorted(permutation(Rng(seed), n).tolist()) == list(range(n))
