"""Synthetic benchmark data, CSV ingestion, preprocessing and the
transductive labeled/unlabeled split."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContractError, DataError, ParseError, SchemaError, SplitError
from .numerics import Rng, permutation


@dataclass
class Dataset:
    x: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    k: int
    class_names: list[str] = field(default_factory=list)
    # column indices carrying class signal, when known (synthetic data only)
    informative_idx: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.x.ndim != 2 or self.x.shape[0] != self.y.size:
            raise ContractError(f"{self.y.size} labels for data of shape {self.x.shape}")
        if len(self.feature_names) != self.x.shape[1]:
            raise ContractError("feature_names length does not match column count")
        if not self.class_names:
            self.class_names = [str(c) for c in range(self.k)]

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass
class SemiSplit:
    labeled_idx: np.ndarray
    unlabeled_idx: np.ndarray
    fraction_unlabeled: float

    def partial_labels(self, y) -> np.ndarray:
        """Labels with unlabeled positions set to -1."""
        out = np.asarray(y, dtype=np.int64).copy()
        out[self.unlabeled_idx] = -1
        return out


@dataclass
class SynthConfig:
    n: int = 1000
    d: int = 1000
    n_informative: int = 8
    separability: float = 0.8
    k: int = 2
    n_clusters_per_class: int = 1
    flip_fraction: float = 0.01
    seed: int = 0

    def validate(self) -> None:
        if self.n < self.k or self.k < 2:
            raise ConfigError("need k >= 2 classes and at least one sample per class")
        if not 1 <= self.n_informative <= self.d:
            raise ConfigError(
                f"n_informative={self.n_informative} must lie in 1..d={self.d}")
        if self.separability < 0:
            raise ConfigError(f"separability must be >= 0, got {self.separability}")
        if not 0 <= self.flip_fraction < 1:
            raise ConfigError("flip_fraction must lie in [0, 1)")
        n_clusters = self.k * self.n_clusters_per_class
        if self.n_clusters_per_class < 1 or n_clusters > 2 ** min(self.n_informative, 62):
            raise ConfigError(
                f"{n_clusters} clusters do not fit on the vertices of a "
                f"{self.n_informative}-dimensional hypercube")


def _random_rotation(rng: Rng, m: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal((m, m)))
    return q * np.sign(np.diag(r))


def hypercube_centroids(cfg: SynthConfig, rng: Rng) -> np.ndarray:
    """Distinct random vertices of ``{-sep, +sep}^n_informative``, one per cluster."""
    n_clusters = cfg.k * cfg.n_clusters_per_class
    m = cfg.n_informative
    chosen: list[tuple] = []
    seen = set()
    while len(chosen) < n_clusters:
        v = tuple(int(b) for b in rng.integers(0, 2, size=m))
        if v not in seen:
            seen.add(v)
            chosen.append(v)
    return (2.0 * np.array(chosen, dtype=np.float64) - 1.0) * cfg.separability


def generate_synthetic(cfg: SynthConfig, rng: Rng | None = None) -> Dataset:
    """Gaussian clusters centred on hypercube vertices plus pure-noise features.

    Cluster ``c`` belongs to class ``c % k``. Informative coordinates are
    ``centroid + N(0, I) R_c`` with a random rotation ``R_c`` per cluster;
    the remaining ``d - n_informative`` columns are standard normal noise.
    Samples and columns are shuffled and a ``flip_fraction`` of labels is
    reassigned to a different class.
    """
    cfg.validate()
    rng = rng if rng is not None else Rng(cfg.seed)
    n_clusters = cfg.k * cfg.n_clusters_per_class
    centroids = hypercube_centroids(cfg, rng.child(0))

    gen = rng.child(1)
    sizes = np.full(n_clusters, cfg.n // n_clusters)
    sizes[: cfg.n % n_clusters] += 1
    blocks, labels = [], []
    for c in range(n_clusters):
        noise = gen.normal((sizes[c], cfg.n_informative))
        blocks.append(centroids[c] + noise @ _random_rotation(gen, cfg.n_informative))
        labels.append(np.full(sizes[c], c % cfg.k))
    informative = np.vstack(blocks)
    y = np.concatenate(labels)
    x = np.hstack([informative, gen.normal((cfg.n, cfg.d - cfg.n_informative))])

    shuffle = rng.child(2)
    rows = permutation(shuffle, cfg.n)
    cols = permutation(shuffle, cfg.d)
    x = x[rows][:, cols]
    y = y[rows]
    informative_idx = np.sort(np.flatnonzero(cols < cfg.n_informative))

    flips = shuffle.generator.random(cfg.n) < cfg.flip_fraction
    if flips.any():
        shift = shuffle.integers(1, cfg.k, size=int(flips.sum()))
        y[flips] = (y[flips] + shift) % cfg.k

    return Dataset(x=x, y=y, feature_names=[f"f{j}" for j in range(cfg.d)], k=cfg.k,
                   informative_idx=informative_idx)


def load_csv(path, label_column: str = "label", transpose: bool = False,
             delimiter: str = ",") -> Dataset:
    """Read a labeled numeric table.

    Default layout: header row, one sample per row. With ``transpose=True``
    the file holds one feature per row: the first column names the
    feature, the header names the samples, and the row whose first cell
    equals ``label_column`` carries the class of each sample. Class names
    are mapped to ids in order of first appearance.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    if not rows:
        raise SchemaError(f"{path} is empty")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"ragged row: {len(r)} cells, expected {width}", row=i, col=len(r))

    if transpose:
        body = [r for r in rows[1:]]
        label_rows = [r for r in body if r[0] == label_column]
        if not label_rows:
            raise SchemaError(f"label row {label_column!r} not found in {path}")
        raw_labels = label_rows[0][1:]
        feature_names = [r[0] for r in body if r[0] != label_column]
        cells = [(i + 1, r[1:]) for i, r in enumerate(body) if r[0] != label_column]
        values = _parse_block(cells, col_offset=1)
        x = values.T
    else:
        header = rows[0]
        if label_column not in header:
            raise SchemaError(f"label column {label_column!r} not found in {path}")
        li = header.index(label_column)
        feature_names = [h for j, h in enumerate(header) if j != li]
        raw_labels = [r[li] for r in rows[1:]]
        cells = [(i + 1, [c for j, c in enumerate(r) if j != li]) for i, r in enumerate(rows[1:])]
        x = _parse_block(cells, col_offset=0, skip=li)

    class_names: list[str] = []
    ids = {}
    y = np.empty(len(raw_labels), dtype=np.int64)
    for i, lab in enumerate(raw_labels):
        if lab not in ids:
            ids[lab] = len(class_names)
            class_names.append(lab)
        y[i] = ids[lab]
    x = x.reshape(len(raw_labels), len(feature_names))
    return Dataset(x=x, y=y, feature_names=feature_names, k=len(class_names),
                   class_names=class_names)


def _parse_block(cells, col_offset: int, skip: int | None = None) -> np.ndarray:
    out = []
    for row_no, row in cells:
        parsed = []
        for j, c in enumerate(row):
            try:
                v = float(c)
            except ValueError:
                col = j + col_offset + (1 if skip is not None and j >= skip else 0)
                raise ParseError(f"non-numeric cell {c!r}", row=row_no, col=col) from None
            if not math.isfinite(v):
                col = j + col_offset + (1 if skip is not None and j >= skip else 0)
                raise ParseError(f"non-finite cell {c!r}", row=row_no, col=col)
            parsed.append(v)
        out.append(parsed)
    return np.array(out, dtype=np.float64).reshape(len(out), -1)


def write_csv(ds: Dataset, path, label_column: str = "label", delimiter: str = ",") -> None:
    """Write ``ds`` in the default sample-per-row layout; floats round-trip exactly."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(list(ds.feature_names) + [label_column])
        for row, lab in zip(ds.x, ds.y):
            w.writerow([repr(float(v)) for v in row] + [ds.class_names[lab]])


def preprocess(ds: Dataset, log: bool = False) -> Dataset:
    """Optional ``log(1 + x)``, then per-feature standardization over all samples.

    Zero-variance features come out as all zeros.
    """
    x = ds.x.copy()
    if log:
        neg = np.flatnonzero((x < 0).any(axis=0))
        if neg.size:
            raise DataError(
                f"feature {ds.feature_names[neg[0]]!r} has negative values; "
                "cannot apply the log transform")
        x = np.log1p(x)
    x = x - x.mean(axis=0)
    std = x.std(axis=0)
    nonconst = std > 1e-12 * np.maximum(1.0, np.abs(ds.x).max(axis=0))
    x[:, nonconst] /= std[nonconst]
    x[:, ~nonconst] = 0.0
    return replace(ds, x=x)


def mask_labels(ds: Dataset, fraction: float, rng: Rng, max_attempts: int = 100) -> SemiSplit:
    """Hide ``round(fraction * n)`` uniformly chosen labels.

    Redraws until every class keeps at least one labeled sample.
    """
    if not 0 < fraction < 1:
        raise ContractError(f"fraction must lie in (0, 1), got {fraction}")
    n_unlab = int(round(fraction * ds.n))
    for _ in range(max_attempts):
        perm = permutation(rng, ds.n)
        unlabeled = np.sort(perm[:n_unlab])
        labeled = np.sort(perm[n_unlab:])
        if np.unique(ds.y[labeled]).size == ds.k:
            return SemiSplit(labeled, unlabeled, fraction)
    raise SplitError(f"could not keep all {ds.k} classes labeled after {max_attempts} draws")
