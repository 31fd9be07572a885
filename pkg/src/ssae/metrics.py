"""Classification metrics and prediction-score density curves."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import ContractError, UndefinedMetricError

GRID_POINTS = 201


def _pair(pred, truth):
    pred = np.asarray(pred).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if pred.size != truth.size:
        raise ContractError(f"length mismatch: {pred.size} vs {truth.size}")
    if pred.size == 0:
        raise ContractError("empty input")
    return pred, truth


def accuracy(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    return float(np.mean(pred == truth))


def roc_auc(scores_pos, truth_binary) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic.

    Equals the fraction of (positive, negative) pairs ordered correctly,
    ties counting one half.
    """
    s, t = _pair(np.asarray(scores_pos, dtype=np.float64), truth_binary)
    pos = t == 1
    n_pos = int(pos.sum())
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC AUC needs both classes in the ground truth")
    ranks = rankdata(s)  # average ranks give ties half credit
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def confusion_matrix(pred, truth, k: int) -> np.ndarray:
    pred, truth = _pair(pred, truth)
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (truth.astype(np.int64), pred.astype(np.int64)), 1)
    return cm


def f1_per_class(pred, truth, k: int) -> np.ndarray:
    cm = confusion_matrix(pred, truth, k)
    tp = np.diag(cm).astype(np.float64)
    n_pred = cm.sum(axis=0)
    n_true = cm.sum(axis=1)
    out = np.zeros(k)
    for c in range(k):
        if n_pred[c] == 0 and n_true[c] == 0:
            out[c] = 1.0
        elif n_pred[c] + n_true[c] > 0:
            # 2PR/(P+R) == 2TP/(n_pred + n_true)
            out[c] = 2.0 * tp[c] / (n_pred[c] + n_true[c])
    return out


def f1_score(pred, truth, k: int, average: str = "macro") -> float:
    per = f1_per_class(pred, truth, k)
    if average == "macro":
        return float(per.mean())
    if average == "weighted":
        support = np.bincount(np.asarray(truth, dtype=np.int64), minlength=k)
        return float((per * support).sum() / support.sum())
    raise ContractError(f"unknown F1 average {average!r}")


def f1_macro(pred, truth, k: int) -> float:
    return f1_score(pred, truth, k, "macro")


@dataclass
class MethodScores:
    accuracy: float
    auc: float
    f1: float


@dataclass
class EvalReport:
    """Per-seed metrics for each method, with arithmetic means."""
    per_seed: dict[str, dict[int, MethodScores]] = field(default_factory=dict)

    def add(self, method: str, seed: int, scores: MethodScores) -> None:
        self.per_seed.setdefault(method, {})[seed] = scores

    @property
    def methods(self) -> list[str]:
        return list(self.per_seed)

    def mean(self, method: str) -> MethodScores:
        rows = list(self.per_seed[method].values())
        return MethodScores(*(float(np.mean([getattr(r, f) for r in rows]))
                              for f in ("accuracy", "auc", "f1")))


def evaluate(pred, scores, truth, k: int, average: str = "macro") -> MethodScores:
    """Accuracy, AUC of the class-1 score (binary tasks) and F1."""
    truth = np.asarray(truth)
    scores = np.asarray(scores, dtype=np.float64)
    auc = roc_auc(scores[:, 1], truth == 1) if k == 2 else float("nan")
    return MethodScores(accuracy(pred, truth), auc, f1_score(pred, truth, k, average))


@dataclass
class ScoreDistribution:
    grid: np.ndarray
    density_per_class: dict[int, np.ndarray]
    bandwidth: dict[int, float]
    flipped: bool = True


def silverman_bandwidth(values: np.ndarray) -> float:
    n = values.size
    if n < 2:
        return 0.0
    std = values.std(ddof=1)
    iqr = np.subtract(*np.percentile(values, [75, 25]))
    spread = min(std, iqr / 1.349) if iqr > 0 else std
    return float(0.9 * spread * n ** (-0.2))


def gaussian_kde(values, grid, bandwidth: float) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if values.size == 0:
        return np.zeros_like(grid)
    u = (grid[:, None] - values[None, :]) / bandwidth
    return np.exp(-0.5 * u * u).sum(axis=1) / (values.size * bandwidth * np.sqrt(2 * np.pi))


def score_distribution(scores, truth, bandwidth: float | None = None,
                       min_bandwidth: float = 1e-2, flip: bool = True) -> ScoreDistribution:
    """Gaussian KDE of predicted-class confidence, one curve per true class.

    ``scores`` holds each sample's confidence in its predicted class. The
    class 0 curve is mirrored around 0.5 (evaluated on ``1 - s``) so the
    two classes sit on opposite sides of the plot. Without an explicit
    bandwidth, Silverman's rule is used, floored at ``min_bandwidth``.
    """
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if s.size != truth.size:
        raise ContractError("scores and truth differ in length")
    if s.size and (s.min() < 0 or s.max() > 1):
        raise ContractError("scores must lie in [0, 1]")
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    curves, bws = {}, {}
    for c in np.unique(truth):
        vals = s[truth == c]
        if flip and c == 0:
            vals = 1.0 - vals
        bw = bandwidth if bandwidth is not None else max(silverman_bandwidth(vals), min_bandwidth)
        curves[int(c)] = gaussian_kde(vals, grid, bw)
        bws[int(c)] = bw
    return ScoreDistribution(grid, curves, bws, flip)
