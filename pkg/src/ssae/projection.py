"""Euclidean projections onto the l1 ball and the l1,1 constraint set."""
from __future__ import annotations

import numpy as np

from .errors import ContractError


def project_l1_ball(v, radius: float) -> np.ndarray:
    """Project ``v`` onto ``{u : ||u||_1 <= radius}``.

    Uses the sort-and-scan threshold search, O(n log n). Entries that are
    soft-thresholded away are written as literal ``0.0``.
    """
    if radius < 0:
        raise ContractError(f"radius must be >= 0, got {radius}")
    v = np.asarray(v, dtype=np.float64)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    theta = _l1_threshold(a.ravel(), radius)
    return np.where(a > theta, np.sign(v) * (a - theta), 0.0)


def _l1_threshold(a: np.ndarray, radius: float) -> float:
    # a >= 0 with a.sum() > radius > 0
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, u.size + 1)
    hits = np.nonzero(u * j > css - radius)[0]
    # j = 1 always qualifies in exact arithmetic; rounding can hide it for tiny radii
    rho = hits[-1] if hits.size else 0
    return (css[rho] - radius) / (rho + 1.0)


def project_l11(w, eta: float) -> np.ndarray:
    """Two-stage structured projection of a weight matrix.

    The vector of row l1 norms is projected onto the l1 ball of radius
    ``eta``, giving a per-row budget ``t_i``; each row is then projected
    onto its own l1 ball of radius ``t_i``. Rows whose budget is zero
    vanish entirely, so the result is row-sparse and satisfies
    ``l11_norm(result) <= eta``.
    """
    if eta < 0:
        raise ContractError(f"eta must be >= 0, got {eta}")
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2:
        raise ContractError(f"expected a matrix, got shape {w.shape}")
    budgets = project_l1_ball(np.abs(w).sum(axis=1), eta)
    out = np.zeros_like(w)
    for i in np.flatnonzero(budgets):
        out[i] = project_l1_ball(w[i], budgets[i])
    return out


def l11_norm(w) -> float:
    """Sum of row l1 norms, i.e. the sum of all absolute entries."""
    return float(np.abs(np.asarray(w, dtype=np.float64)).sum())
