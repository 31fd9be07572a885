import csv
import json
from dataclasses import replace

import numpy as np
import pytest

from ssae import experiment
from ssae.data import SynthConfig, generate_synthetic
from ssae.errors import ConfigError
from ssae.experiment import ExperimentConfig, format_table, run_experiment, sweep
from ssae.optim import TrainConfig
from tests.test_data import nearest_centroid_accuracy


def small_cfg(tmp_path, **kw):
    base = ExperimentConfig(
        synth=SynthConfig(n=200, d=30, separability=1.5),
        train=TrainConfig(epochs=3, hidden=8),
        seeds=[0, 1], out_dir=str(tmp_path / "run"), overwrite=True,
    )
    return replace(base, **kw)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_run_layout_and_manifest(tmp_path):
    report, bundle = run_experiment(small_cfg(tmp_path))
    assert sorted(report.methods) == sorted(experiment.METHODS)
    assert bundle.missing() == []
    meta = json.loads((bundle.root / "manifest.json").read_text())
    for rel in meta["artifacts"].values():
        assert (bundle.root / rel).exists()
    rows = read_csv(bundle.root / "metrics.csv")
    assert len(rows) == 4 * 2 + 4
    for m in report.methods:
        per = [r for r in rows if r["method"] == m and r["seed"] != "mean"]
        mean = next(r for r in rows if r["method"] == m and r["seed"] == "mean")
        for key in ("accuracy", "auc", "f1"):
            assert abs(np.mean([float(r[key]) for r in per]) - float(mean[key])) < 1e-12
            assert all(0 <= float(r[key]) <= 1 for r in per)


def test_metrics_use_unlabeled_only(tmp_path, monkeypatch):
    seen = []
    real = experiment.evaluate

    def spy(pred, scores, truth, k, average):
        seen.append(len(truth))
        return real(pred, scores, truth, k, average)

    monkeypatch.setattr(experiment, "evaluate", spy)
    run_experiment(small_cfg(tmp_path, seeds=[0]))
    assert seen == [80] * 4  # round(0.4 * 200)


def test_graph_only_run_trains_no_network(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("network training should not run")

    monkeypatch.setattr(experiment, "double_descent", boom)
    monkeypatch.setattr(experiment, "train_fcnn", boom)
    report, bundle = run_experiment(small_cfg(tmp_path, methods=["labprop"]))
    assert report.methods == ["labprop"]
    assert not (bundle.root / "seed_0" / "ssae_model.npz").exists()


def test_deterministic_metrics(tmp_path):
    a = small_cfg(tmp_path, out_dir=str(tmp_path / "a"))
    b = small_cfg(tmp_path, out_dir=str(tmp_path / "b"))
    run_experiment(a)
    run_experiment(b)
    for name in ("metrics.csv", "seed_0/latent.csv", "seed_1/weights_sorted.csv",
                 "seed_0/ssae_model.npz", "seed_1/distributions.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_overwrite_false_refuses(tmp_path):
    cfg = small_cfg(tmp_path, seeds=[0], methods=["labprop"])
    run_experiment(cfg)
    before = (tmp_path / "run" / "metrics.csv").read_bytes()
    with pytest.raises(ConfigError):
        run_experiment(replace(cfg, overwrite=False, methods=["labspread"]))
    assert (tmp_path / "run" / "metrics.csv").read_bytes() == before


def test_config_validation(tmp_path):
    for bad in (dict(methods=[]), dict(seeds=[]), dict(methods=["svm"]),
                dict(unlabeled_frac=1.0), dict(dataset="csv")):
        with pytest.raises(ConfigError):
            run_experiment(small_cfg(tmp_path, **bad))


def test_table_layout(tmp_path):
    report, _ = run_experiment(small_cfg(tmp_path, seeds=[0]))
    lines = format_table(report).splitlines()
    assert lines[0].split() == ["SSAE", "LProp", "LSpread", "FCNN"]
    assert [l.split()[0] for l in lines[1:]] == ["Accuracy", "AUC", "F1"]


def test_sweep_shape(tmp_path):
    cfg = small_cfg(tmp_path, artifacts=False, out_dir=str(tmp_path / "sw"))
    rows = sweep(cfg, "separability", [0.5, 2.0])
    assert len(rows) == 4 * 2 * 2
    table = read_csv(tmp_path / "sw" / "sweep_separability.csv")
    assert len(table) == len(rows)
    assert list(table[0]) == ["separability", "method", "seed", "accuracy", "auc", "f1"]
    assert (tmp_path / "sw" / "sweep_separability.svg").exists()


def test_sweep_single_value_matches_run(tmp_path):
    cfg = small_cfg(tmp_path, artifacts=False, out_dir=str(tmp_path / "sw"))
    rows = sweep(cfg, "separability", [1.5])
    report, _ = run_experiment(replace(cfg, out_dir=str(tmp_path / "plain")))
    for r in rows:
        s = report.per_seed[r["method"]][r["seed"]]
        assert (r["accuracy"], r["auc"], r["f1"]) == (s.accuracy, s.auc, s.f1)


def test_sweep_informative_schema(tmp_path):
    cfg = small_cfg(tmp_path, artifacts=False, seeds=[0], methods=["labprop"],
                    out_dir=str(tmp_path / "inf"))
    rows = sweep(cfg, "n_informative", [2, 8, 16])
    assert sorted({r["n_informative"] for r in rows}) == [2, 8, 16]
    header = list(read_csv(tmp_path / "inf" / "sweep_n_informative.csv")[0])
    assert header == ["n_informative", "method", "seed", "accuracy", "auc", "f1"]


def test_more_informative_features_not_harder():
    # nearest-centroid oracle on the generator itself, averaged over seeds
    acc = {m: np.mean([nearest_centroid_accuracy(generate_synthetic(
        SynthConfig(n=2000, d=64, n_informative=m, separability=0.5, seed=s, flip_fraction=0)))
        for s in range(5)]) for m in (2, 8, 32)}
    assert acc[2] <= acc[8] <= acc[32]


def test_export_from_run(tmp_path):
    cfg = small_cfg(tmp_path, seeds=[0])
    run_experiment(cfg)
    files = experiment.export_from_run(tmp_path / "run", tmp_path / "re")
    for name in ("latent.csv", "weights_sorted.csv", "weights_heatmap.png", "latent_labeled.svg"):
        assert (tmp_path / "re" / "seed_0" / name).read_bytes() == \
            (tmp_path / "run" / "seed_0" / name).read_bytes()
    assert all(p.exists() for p in files.values())


def test_csv_dataset_run(tmp_path):
    rng = np.random.default_rng(0)
    x = np.abs(np.vstack([rng.normal(1, 1, size=(40, 6)), rng.normal(4, 1, size=(40, 6))]))
    path = tmp_path / "bio.csv"
    with path.open("w") as fh:
        fh.write(",".join(f"g{i}" for i in range(6)) + ",label\n")
        for i, row in enumerate(x):
            fh.write(",".join(repr(float(v)) for v in row) + ("," + ("control" if i < 40 else "NSCLC")) + "\n")
    cfg = small_cfg(tmp_path, dataset="csv", csv_path=str(path), seeds=[0],
                    train=TrainConfig(epochs=10, hidden=8, batch_size=8, eta=50.0))
    report, _ = run_experiment(cfg)
    assert report.mean("ssae").accuracy > 0.9
