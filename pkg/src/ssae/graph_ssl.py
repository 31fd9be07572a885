"""kNN-graph Label Propagation and Label Spreading.

Both methods are transductive: they take every sample, labeled or not,
and return class scores for all of them. Partial labels use ``-1`` for
unknown.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ConfigError, ContractError


@dataclass
class AffinityGraph:
    adjacency: sparse.csr_matrix

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def symmetric(self) -> bool:
        return (self.adjacency != self.adjacency.T).nnz == 0

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def weights(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.data[a.indptr[i]:a.indptr[i + 1]]


@dataclass
class LabelDistribution:
    f: np.ndarray          # row-normalized scores
    raw: np.ndarray        # last iterate before renormalization
    n_iter: int
    converged: bool
    unreachable: np.ndarray  # rows that received no label mass

    def predict(self) -> np.ndarray:
        return np.argmax(self.f, axis=1)


def pairwise_sq_distances(x: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def knn_affinity(x, k_neighbors: int = 7) -> AffinityGraph:
    """Union-symmetrized 0/1 kNN graph under Euclidean distance.

    Self-loops are excluded; equal distances are resolved toward the
    lower sample index.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k_neighbors < n:
        raise ConfigError(f"k_neighbors must lie in 1..n-1 = {n - 1}, got {k_neighbors}")
    d2 = pairwise_sq_distances(x)
    np.fill_diagonal(d2, np.inf)
    nbrs = np.argsort(d2, axis=1, kind="stable")[:, :k_neighbors]
    rows = np.repeat(np.arange(n), k_neighbors)
    a = sparse.csr_matrix((np.ones(rows.size), (rows, nbrs.ravel())), shape=(n, n))
    a = a.maximum(a.T).tocsr()
    a.sort_indices()
    return AffinityGraph(a)


def _initial_labels(y_partial, n: int, k: int | None):
    y = np.asarray(y_partial, dtype=np.int64).reshape(-1)
    if y.size != n:
        raise ContractError(f"{y.size} labels for a graph of {n} nodes")
    labeled = y >= 0
    if not labeled.any():
        raise ContractError("no labeled nodes")
    k = int(y.max()) + 1 if k is None else k
    present = np.unique(y[labeled])
    if present.size != k:
        raise ContractError(f"every class needs a labeled node; found {present.tolist()}")
    y0 = np.zeros((n, k))
    y0[np.flatnonzero(labeled), y[labeled]] = 1.0
    return y0, labeled


def _renormalize(f: np.ndarray):
    s = f.sum(axis=1, keepdims=True)
    empty = s[:, 0] <= 0
    out = np.where(s > 0, f / np.where(s > 0, s, 1.0), 1.0 / f.shape[1])
    return out, empty


def label_propagation(g: AffinityGraph, y_partial, tol: float = 1e-3,
                      max_iter: int = 1000, k: int | None = None) -> LabelDistribution:
    """Hard-clamped diffusion ``f <- D^-1 A f`` over the graph."""
    y0, labeled = _initial_labels(y_partial, g.n, k)
    deg = np.asarray(g.adjacency.sum(axis=1)).ravel()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    p = sparse.diags(inv) @ g.adjacency
    f = y0.copy()
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        nxt = p @ f
        nxt[labeled] = y0[labeled]
        delta = np.abs(nxt - f).max()
        f = nxt
        if delta < tol:
            converged = True
            break
    norm, empty = _renormalize(f)
    return LabelDistribution(norm, f, it, converged, empty)


def spreading_operator(g: AffinityGraph) -> sparse.csr_matrix:
    """``D^-1/2 A D^-1/2``."""
    deg = np.asarray(g.adjacency.sum(axis=1)).ravel()
    inv_sqrt = np.divide(1.0, np.sqrt(deg), out=np.zeros_like(deg), where=deg > 0)
    d = sparse.diags(inv_sqrt)
    return (d @ g.adjacency @ d).tocsr()


def label_spreading(g: AffinityGraph, y_partial, alpha: float = 0.2, tol: float = 1e-3,
                    max_iter: int = 1000, k: int | None = None) -> LabelDistribution:
    """Soft-clamped diffusion ``f <- alpha S f + (1 - alpha) y0``."""
    if not 0 < alpha < 1:
        raise ContractError(f"alpha must lie in (0, 1), got {alpha}")
    y0, _ = _initial_labels(y_partial, g.n, k)
    s = spreading_operator(g)
    base = (1.0 - alpha) * y0
    f = y0.copy()
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        nxt = alpha * (s @ f) + base
        delta = np.abs(nxt - f).max()
        f = nxt
        if delta < tol:
            converged = True
            break
    norm, empty = _renormalize(f)
    return LabelDistribution(norm, f, it, converged, empty)
