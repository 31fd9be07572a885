"""Artifact exporters for latent coordinates, first-layer weights and
prediction-score distributions."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import plots
from .data import SemiSplit
from .metrics import score_distribution
from .network import ModelParams, latent

log = logging.getLogger(__name__)

# top-to-bottom panel order of the distribution figure
DISTRIBUTION_ORDER = ("labprop", "labspread", "fcnn", "ssae")
METHOD_TITLES = {"ssae": "SSAE", "fcnn": "FCNN", "labprop": "LabelPropagation",
                 "labspread": "LabelSpreading"}


def _num(v: float) -> str:
    return "0" if v == 0 else repr(float(v))


def export_latent(params: ModelParams, x, y, split: SemiSplit, out_dir,
                  class_names=None) -> dict[str, Path]:
    """Latent coordinates of every sample, plus labeled/unlabeled scatters when k = 2."""
    out_dir = Path(out_dir)
    z = latent(params, x)
    y = np.asarray(y)
    is_labeled = np.zeros(len(z), dtype=bool)
    is_labeled[split.labeled_idx] = True
    paths = {"latent_csv": out_dir / "latent.csv"}
    with paths["latent_csv"].open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample"] + [f"z{j + 1}" for j in range(z.shape[1])] + ["label", "labeled"])
        for i, row in enumerate(z):
            w.writerow([i] + [repr(float(v)) for v in row] + [int(y[i]), int(is_labeled[i])])
    if z.shape[1] != 2:
        log.warning("latent space has %d dimensions; skipping scatter plots", z.shape[1])
        return paths
    xlim = plots._limits(z[:, 0])
    ylim = plots._limits(z[:, 1])
    for key, idx, title in (("latent_labeled_svg", split.labeled_idx, "Labeled samples"),
                            ("latent_unlabeled_svg", split.unlabeled_idx, "Unlabeled samples")):
        paths[key] = out_dir / f"{key[:-4]}.svg"
        plots.scatter_svg(paths[key], z[idx], y[idx], title=title,
                          class_names=class_names, xlim=xlim, ylim=ylim)
    return paths


@dataclass
class HeatmapExport:
    csv: Path
    png: Path
    order: np.ndarray
    zero_rows: np.ndarray  # feature indices whose row is entirely zero


def export_weight_heatmap(w1, out_dir, feature_names=None, stem="weights") -> HeatmapExport:
    """First-layer weights, features sorted by decreasing row l1 norm.

    The PNG puts features on the horizontal axis (strongest on the left)
    and hidden neurons on the vertical axis; |w| is drawn on a log colour
    scale with exact zeros left white.
    """
    w1 = np.asarray(w1, dtype=np.float64)
    d, h = w1.shape
    names = list(feature_names) if feature_names is not None else [f"f{j}" for j in range(d)]
    order = np.argsort(-np.abs(w1).sum(axis=1), kind="stable")
    sorted_w = w1[order]
    out_dir = Path(out_dir)
    csv_path = out_dir / f"{stem}_sorted.csv"
    with csv_path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["feature"] + [f"n{j}" for j in range(h)])
        for i, row in zip(order, sorted_w):
            wr.writerow([names[i]] + [_num(v) for v in row])
    img = plots.log_colormap(sorted_w.T)
    sx = max(1, 600 // d)
    sy = max(1, 200 // h)
    img = np.repeat(np.repeat(img, sy, axis=0), sx, axis=1)
    png_path = out_dir / f"{stem}_heatmap.png"
    plots.write_png(png_path, img)
    zero_rows = np.sort(np.flatnonzero(~w1.any(axis=1)))
    return HeatmapExport(csv_path, png_path, order, zero_rows)


def export_distributions(confidence: dict[str, np.ndarray], truth, out_dir,
                         class_names=None) -> dict[str, Path]:
    """One KDE panel per method, plus a stacked figure in the canonical order.

    ``confidence[m]`` is each evaluated sample's score for the class that
    method ``m`` predicted.
    """
    out_dir = Path(out_dir)
    methods = [m for m in DISTRIBUTION_ORDER if m in confidence]
    methods += [m for m in confidence if m not in methods]
    panels, paths = [], {}
    for m in methods:
        dist = score_distribution(confidence[m], truth)
        title = METHOD_TITLES.get(m, m)
        panel = (title, dist.grid, dist.density_per_class)
        panels.append(panel)
        paths[f"distribution_{m}_svg"] = out_dir / f"distribution_{m}.svg"
        plots.density_panels_svg(paths[f"distribution_{m}_svg"], [panel], class_names)
        paths[f"distribution_{m}_csv"] = out_dir / f"distribution_{m}.csv"
        with paths[f"distribution_{m}_csv"].open("w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            classes = list(dist.density_per_class)
            wr.writerow(["score"] + [f"class_{c}" for c in classes])
            for i, g in enumerate(dist.grid):
                wr.writerow([f"{g:.3f}"] + [repr(float(dist.density_per_class[c][i]))
                                            for c in classes])
    paths["distributions_svg"] = out_dir / "distributions.svg"
    plots.density_panels_svg(paths["distributions_svg"], panels, class_names)
    return paths
