import csv

import pytest

from ssae.cli import build_config, main, read_config_file
from ssae.data import load_csv
from ssae.errors import ConfigError

FAST = ["--n", "120", "--d", "20", "--sep", "1.5", "--epochs", "2", "--hidden", "6", "--seeds", "0"]


def test_config_file_then_flags(tmp_path):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text("# defaults for a quick run\ntrain.gamma = 0.01\ntrain.eta=5\n"
                        "run.methods = labprop, ssae\ndata.log = auto\n")
    settings = read_config_file(cfg_path)
    settings["train.gamma"] = 0.05  # a command-line flag arrives parsed
    cfg = build_config(settings)
    assert cfg.train.gamma == 0.05
    assert cfg.train.eta == 5.0
    assert cfg.methods == ["labprop", "ssae"]
    assert cfg.log_transform is None


@pytest.mark.parametrize("text", ["train.gama=1\n", "no equals sign\n", "train.epochs=many\n"])
def test_bad_config_file(tmp_path, text):
    p = tmp_path / "bad.cfg"
    p.write_text(text)
    with pytest.raises(ConfigError):
        build_config(read_config_file(p))


def test_run_prints_table(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", *FAST, "--out-dir", str(out)]) == 0
    text = capsys.readouterr().out
    assert "Accuracy" in text and "SSAE" in text
    assert (out / "metrics.csv").exists()


def test_exit_code_config_error(tmp_path, capsys):
    assert main(["run", *FAST, "--methods", "svm", "--out-dir", str(tmp_path)]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_refuses_overwrite(tmp_path):
    args = ["run", *FAST, "--methods", "labprop", "--out-dir", str(tmp_path / "r")]
    assert main(args) == 0
    assert main(args) == 2
    assert main(args + ["--overwrite"]) == 0


def test_exit_code_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,label\n1,2,x\n3,oops,y\n")
    assert main(["run", "--dataset", "csv", "--csv-path", str(bad), "--out-dir", str(tmp_path / "o")]) == 3
    err = capsys.readouterr().err
    assert "data error" in err and "row" in err


def test_synth_gen_roundtrip(tmp_path):
    path = tmp_path / "synth.csv"
    assert main(["synth-gen", "-o", str(path), "--n", "50", "--d", "12", "--seed", "3"]) == 0
    ds = load_csv(path)
    assert ds.x.shape == (50, 12) and ds.k == 2


def test_sweep_rows(tmp_path):
    out = tmp_path / "sw"
    args = ["sweep-sep", *FAST, "--methods", "labprop,labspread", "--seeds", "0,1",
            "--values", "0.5,1,2", "--artifacts", "false", "--out-dir", str(out)]
    assert main(args) == 0
    with (out / "sweep_separability.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 3 * 2


def test_sweep_informative(tmp_path):
    out = tmp_path / "inf"
    assert main(["sweep-informative", *FAST, "--methods", "labprop", "--values", "2,8",
                 "--out-dir", str(out)]) == 0
    assert (out / "n_informative_2" / "metrics.csv").exists()
    assert (out / "n_informative_8" / "metrics.csv").exists()


def test_export_subcommand(tmp_path, capsys):
    run_dir = tmp_path / "r"
    assert main(["run", *FAST, "--out-dir", str(run_dir)]) == 0
    assert main(["export", "--run-dir", str(run_dir)]) == 0
    assert "latent" in capsys.readouterr().out
    assert (run_dir / "export" / "seed_0" / "latent.csv").read_bytes() == \
        (run_dir / "seed_0" / "latent.csv").read_bytes()
    assert main(["export", "--run-dir", str(run_dir)]) == 2
    assert main(["export", "--run-dir", str(run_dir), "--overwrite"]) == 0
    assert main(["export", "--run-dir", str(tmp_path / "nothing")]) == 2
