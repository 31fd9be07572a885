"""Dense float64 kernel and seeded randomness.

Matrices are plain ``numpy.ndarray`` objects of dtype float64, samples
as rows. Randomness goes through :class:`Rng`, a thin wrapper over the
PCG64 bit generator whose streams are defined by the seed alone and are
identical across platforms.
"""
from __future__ import annotations

import numpy as np

from .errors import ContractError


class Rng:
    """Seeded random stream.

    ``Rng(seed)`` always yields the same sequence for the same call order.
    :meth:`child` derives independent streams keyed by a small tuple so
    that, e.g., the split of seed 1 never depends on how many draws the
    generator of seed 1 made.
    """

    def __init__(self, seed: int, key: tuple = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def child(self, *key: int) -> "Rng":
        return Rng(self.seed, self.key + tuple(key))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def normal(self, size, mean=0.0, std=1.0) -> np.ndarray:
        return self._gen.normal(mean, std, size=size)

    def uniform(self, size, low=0.0, high=1.0) -> np.ndarray:
        return self._gen.uniform(low, high, size=size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def __repr__(self):
        return f"Rng(seed={self.seed}, key={self.key})"


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ContractError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ContractError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def sample_gaussian(rng: Rng, rows: int, cols: int, mean=0.0, std=1.0) -> np.ndarray:
    if std < 0:
        raise ContractError(f"std must be >= 0, got {std}")
    if std == 0:
        return np.full((rows, cols), float(mean))
    return rng.normal((rows, cols), mean, std)


def permutation(rng: Rng, n: int) -> np.ndarray:
    """Uniform random permutation of ``0..n-1`` (Fisher-Yates)."""
    if n < 0:
        raise ContractError(f"n must be >= 0, got {n}")
    return rng.generator.permutation(n)


def row_slice(m, indices) -> np.ndarray:
    m = as_matrix(m)
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= m.shape[0]):
        raise ContractError(f"row index out of range for {m.shape[0]} rows")
    return m[idx].copy()
