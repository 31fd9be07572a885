"""Experiment protocol: per seed, build data, hide labels, fit every method
on the labeled part and score it on the hidden part only.

Output layout of a run directory::

    manifest.json          configuration, versions, artifact paths
    metrics.csv            one row per (seed, method) plus mean rows
    seed_<s>/              per-seed artifacts (latent, weights, distributions, model)
"""
from __future__ import annotations

import csv
import io
import json
import logging
import platform
import zipfile
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, plots
from .data import Dataset, SemiSplit, SynthConfig, generate_synthetic, load_csv, mask_labels, preprocess
from .errors import ConfigError, SSAEError
from .export import export_distributions, export_latent, export_weight_heatmap
from .graph_ssl import knn_affinity, label_propagation, label_spreading
from .metrics import EvalReport, MethodScores, evaluate
from .network import ModelParams, predict
from .numerics import Rng
from .optim import SparsityMask, TrainConfig, double_descent, train_fcnn

log = logging.getLogger(__name__)

METHODS = ("ssae", "fcnn", "labprop", "labspread")
TABLE_ORDER = ("ssae", "labprop", "labspread", "fcnn")
TABLE_NAMES = {"ssae": "SSAE", "labprop": "LProp", "labspread": "LSpread", "fcnn": "FCNN"}

# spawn keys of the per-seed random streams; the synthetic generator owns key ()
SPLIT_STREAM, SSAE_STREAM, FCNN_STREAM = 100, 101, 102


@dataclass
class ExperimentConfig:
    dataset: str = "synth"  # "synth" | "csv"
    synth: SynthConfig = field(default_factory=SynthConfig)
    csv_path: str | None = None
    label_column: str = "label"
    transpose: bool = False
    delimiter: str = ","
    log_transform: bool | None = None  # None: on for csv data, off for synthetic
    unlabeled_frac: float = 0.4
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    train: TrainConfig = field(default_factory=TrainConfig)
    knn: int = 7
    alpha: float = 0.2
    graph_tol: float = 1e-3
    graph_max_iter: int = 1000
    f1_average: str = "macro"
    out_dir: str = "runs/latest"
    overwrite: bool = False
    artifacts: bool = True

    def validate(self) -> None:
        if self.dataset not in ("synth", "csv"):
            raise ConfigError(f"dataset must be 'synth' or 'csv', got {self.dataset!r}")
        if self.dataset == "csv" and not self.csv_path:
            raise ConfigError("csv dataset needs a csv path")
        if not self.methods:
            raise ConfigError("at least one method is required")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if not 0 < self.unlabeled_frac < 1:
            raise ConfigError("unlabeled fraction must lie in (0, 1)")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.f1_average not in ("macro", "weighted"):
            raise ConfigError(f"unknown F1 average {self.f1_average!r}")
        self.train.validate()
        if self.dataset == "synth":
            self.synth.validate()

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ArtifactBundle:
    root: Path
    files: dict[str, Path] = field(default_factory=dict)

    def relative(self) -> dict[str, str]:
        return {k: v.relative_to(self.root).as_posix() for k, v in sorted(self.files.items())}

    def missing(self) -> list[str]:
        return [k for k, p in self.files.items() if not p.exists()]


@dataclass
class SeedResult:
    seed: int
    split: SemiSplit
    scores: dict[str, MethodScores]
    predictions: dict[str, tuple[np.ndarray, np.ndarray]]  # method -> (labels, scores) on unlabeled
    ssae: object | None = None  # DoubleDescentResult


def load_dataset(cfg: ExperimentConfig, seed: int) -> Dataset:
    if cfg.dataset == "synth":
        raw = generate_synthetic(replace(cfg.synth, seed=seed))
    else:
        raw = load_csv(cfg.csv_path, label_column=cfg.label_column,
                       transpose=cfg.transpose, delimiter=cfg.delimiter)
    use_log = cfg.log_transform if cfg.log_transform is not None else cfg.dataset == "csv"
    return preprocess(raw, log=use_log)


def run_seed(cfg: ExperimentConfig, seed: int, ds: Dataset | None = None) -> tuple[Dataset, SeedResult]:
    ds = ds if ds is not None else load_dataset(cfg, seed)
    split = mask_labels(ds, cfg.unlabeled_frac, Rng(seed, (SPLIT_STREAM,)))
    lab, unl = split.labeled_idx, split.unlabeled_idx
    x_lab, y_lab = ds.x[lab], ds.y[lab]
    x_unl, y_unl = ds.x[unl], ds.y[unl]
    train = replace(cfg.train, seed=seed)

    preds: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    dd = None
    graph = None
    for method in cfg.methods:
        try:
            if method == "ssae":
                dd = double_descent(train, x_lab, y_lab, ds.k, Rng(seed, (SSAE_STREAM,)))
                preds[method] = predict(dd.params, x_unl)
            elif method == "fcnn":
                params, _ = train_fcnn(train, x_lab, y_lab, ds.k, Rng(seed, (FCNN_STREAM,)))
                preds[method] = predict(params, x_unl)
            else:
                graph = graph if graph is not None else knn_affinity(ds.x, cfg.knn)
                partial = split.partial_labels(ds.y)
                if method == "labprop":
                    dist = label_propagation(graph, partial, cfg.graph_tol, cfg.graph_max_iter, ds.k)
                else:
                    dist = label_spreading(graph, partial, cfg.alpha, cfg.graph_tol,
                                           cfg.graph_max_iter, ds.k)
                if dist.unreachable[unl].any():
                    log.warning("seed %d %s: %d unlabeled samples unreachable from any label",
                                seed, method, int(dist.unreachable[unl].sum()))
                preds[method] = (dist.predict()[unl], dist.f[unl])
        except SSAEError as exc:
            raise type(exc)(f"seed {seed}, method {method}: {exc}") from exc
    scores = {m: evaluate(p, s, y_unl, ds.k, cfg.f1_average) for m, (p, s) in preds.items()}
    return ds, SeedResult(seed, split, scores, preds, dd)


def save_model(path, result, split: SemiSplit) -> None:
    """npz of the trained SSAE, its mask and split, written with fixed
    zip timestamps so reruns are byte-identical."""
    arrays = {f"params_{n}": a for n, a in result.params.items()}
    arrays["mask"] = result.mask.m0
    arrays["w1_projected"] = result.w1_projected
    arrays["labeled_idx"] = split.labeled_idx
    arrays["unlabeled_idx"] = split.unlabeled_idx
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arrays[name]), allow_pickle=False)
            info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, buf.getvalue())


def load_model(path):
    with np.load(path) as z:
        params = ModelParams(**{k[len("params_"):]: z[k] for k in z.files if k.startswith("params_")})
        split = SemiSplit(z["labeled_idx"], z["unlabeled_idx"], float("nan"))
        return params, SparsityMask(z["mask"]), z["w1_projected"], split


def export_seed(out: Path, ds: Dataset, res: SeedResult) -> dict[str, Path]:
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, Path] = {}
    y_unl = ds.y[res.split.unlabeled_idx]
    if res.ssae is not None:
        files.update(export_latent(res.ssae.params, ds.x, ds.y, res.split, out, ds.class_names))
        hm = export_weight_heatmap(res.ssae.w1_projected, out, ds.feature_names)
        files["weights_csv"] = hm.csv
        files["weights_png"] = hm.png
        files["model_npz"] = out / "ssae_model.npz"
        save_model(files["model_npz"], res.ssae, res.split)
    conf = {m: s.max(axis=1) for m, (_, s) in res.predictions.items()}
    files.update(export_distributions(conf, y_unl, out, ds.class_names))
    return files


def _guard_outputs(root: Path, names, overwrite: bool) -> None:
    if overwrite:
        return
    existing = [n for n in names if (root / n).exists()]
    if existing:
        raise ConfigError(f"{root} already holds {existing}; pass --overwrite true to replace")


def write_metrics(path: Path, report: EvalReport) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "method", "accuracy", "auc", "f1"])
        for m in report.methods:
            for seed, s in report.per_seed[m].items():
                w.writerow([seed, m, repr(s.accuracy), repr(s.auc), repr(s.f1)])
        for m in report.methods:
            s = report.mean(m)
            w.writerow(["mean", m, repr(s.accuracy), repr(s.auc), repr(s.f1)])


def format_table(report: EvalReport) -> str:
    """Methods as columns, metrics as rows."""
    methods = [m for m in TABLE_ORDER if m in report.per_seed]
    means = {m: report.mean(m) for m in methods}
    lines = ["{:<12}".format("") + "".join(f"{TABLE_NAMES[m]:>10}" for m in methods)]
    lines.append("{:<12}".format("Accuracy %") + "".join(f"{100 * means[m].accuracy:>10.2f}" for m in methods))
    lines.append("{:<12}".format("AUC") + "".join(f"{means[m].auc:>10.4f}" for m in methods))
    lines.append("{:<12}".format("F1 score") + "".join(f"{means[m].f1:>10.4f}" for m in methods))
    return "\n".join(lines)


def manifest(cfg: ExperimentConfig, bundle: ArtifactBundle, extra=None) -> dict:
    return {
        "config": cfg.to_dict(),
        "versions": {"ssae": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "artifacts": bundle.relative(),
        **(extra or {}),
    }


def run_experiment(cfg: ExperimentConfig) -> tuple[EvalReport, ArtifactBundle]:
    cfg.validate()
    root = Path(cfg.out_dir)
    _guard_outputs(root, ["metrics.csv", "manifest.json"], cfg.overwrite)
    root.mkdir(parents=True, exist_ok=True)
    report = EvalReport()
    bundle = ArtifactBundle(root)
    csv_data = load_dataset(cfg, cfg.seeds[0]) if cfg.dataset == "csv" else None
    for seed in cfg.seeds:
        ds, res = run_seed(cfg, seed, csv_data)
        for m, s in res.scores.items():
            report.add(m, seed, s)
            log.info("seed %d %-9s acc=%.4f auc=%.4f f1=%.4f", seed, m, s.accuracy, s.auc, s.f1)
        if cfg.artifacts:
            files = export_seed(root / f"seed_{seed}", ds, res)
            bundle.files.update({f"seed_{seed}/{k}": p for k, p in files.items()})
    bundle.files["metrics"] = root / "metrics.csv"
    write_metrics(bundle.files["metrics"], report)
    (root / "manifest.json").write_text(json.dumps(manifest(cfg, bundle), indent=2, sort_keys=True) + "\n")
    return report, bundle


SWEEP_FIELDS = {"separability": float, "n_informative": int}


def sweep(cfg: ExperimentConfig, param: str, values) -> list[dict]:
    """One experiment per value of a synthetic-data parameter.

    Writes ``sweep_<param>.csv`` (long format: value, method, seed,
    metrics) and ``sweep_<param>.svg`` (mean accuracy per method).
    """
    if param not in SWEEP_FIELDS:
        raise ConfigError(f"cannot sweep {param!r}")
    values = [SWEEP_FIELDS[param](v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")
    if cfg.dataset != "synth":
        raise ConfigError("sweeps vary the synthetic generator; use --dataset synth")
    root = Path(cfg.out_dir)
    _guard_outputs(root, [f"sweep_{param}.csv", f"sweep_{param}.svg"], cfg.overwrite)
    rows = []
    for v in values:
        sub = replace(cfg, synth=replace(cfg.synth, **{param: v}),
                      out_dir=str(root / f"{param}_{v}"))
        report, _ = run_experiment(sub)
        for m in report.methods:
            for seed, s in report.per_seed[m].items():
                rows.append({param: v, "method": m, "seed": seed, "accuracy": s.accuracy,
                             "auc": s.auc, "f1": s.f1})
    with (root / f"sweep_{param}.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=[param, "method", "seed", "accuracy", "auc", "f1"],
                           lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    series = {}
    for m in cfg.methods:
        means = [np.mean([r["accuracy"] for r in rows if r["method"] == m and r[param] == v])
                 for v in values]
        series[TABLE_NAMES[m]] = (values, means)
    plots.line_plot_svg(root / f"sweep_{param}.svg", series,
                        title=f"Accuracy vs {param}", xlabel=param, ylabel="accuracy",
                        ylim=(0.0, 1.0))
    return rows


def export_from_run(run_dir, out_dir=None, overwrite: bool = False) -> dict[str, Path]:
    """Re-render latent and weight artifacts of a finished run from its saved models."""
    run_dir = Path(run_dir)
    try:
        meta = json.loads((run_dir / "manifest.json").read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{run_dir} does not look like a run directory: {exc}") from None
    cfg = config_from_dict(meta["config"])
    out_root = Path(out_dir) if out_dir else run_dir / "export"
    files = {}
    for seed in cfg.seeds:
        model = run_dir / f"seed_{seed}" / "ssae_model.npz"
        if not model.exists():
            raise ConfigError(f"{model} not found; was the run made with the ssae method?")
        params, mask, w1_projected, split = load_model(model)
        ds = load_dataset(cfg, seed)
        out = out_root / f"seed_{seed}"
        _guard_outputs(out, ["latent.csv", "weights_sorted.csv"], overwrite)
        out.mkdir(parents=True, exist_ok=True)
        for k, p in export_latent(params, ds.x, ds.y, split, out, ds.class_names).items():
            files[f"seed_{seed}/{k}"] = p
        hm = export_weight_heatmap(w1_projected, out, ds.feature_names)
        files[f"seed_{seed}/weights_csv"] = hm.csv
        files[f"seed_{seed}/weights_png"] = hm.png
    return files


def config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    d["synth"] = SynthConfig(**d.get("synth", {}))
    d["train"] = TrainConfig(**d.get("train", {}))
    return ExperimentConfig(**d)
