"""Command line entry point.

Subcommands: ``synth-gen``, ``run``, ``sweep-sep``, ``sweep-informative``,
``export``. Settings come from built-in defaults, then an optional flat
``key=value`` config file (``--config``), then command-line flags; a
config key ``train.gamma`` is overridden by ``--gamma``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .data import SynthConfig, generate_synthetic, write_csv
from .errors import ConfigError, DataError, SSAEError
from .experiment import METHODS, ExperimentConfig, export_from_run, format_table, run_experiment, sweep
from .optim import TrainConfig

log = logging.getLogger("ssae")


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def int_list(text) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def float_list(text) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def str_list(text) -> list[str]:
    return [v.strip() for v in str(text).split(",") if v.strip()]


def optional_bool(text):
    return None if str(text).lower() == "auto" else parse_bool(text)


# config key -> (flag, parser, target section, attribute)
OPTIONS = {
    "data.dataset": ("--dataset", str, "exp", "dataset"),
    "data.csv_path": ("--csv-path", str, "exp", "csv_path"),
    "data.label_column": ("--label-column", str, "exp", "label_column"),
    "data.transpose": ("--transpose", parse_bool, "exp", "transpose"),
    "data.delimiter": ("--delimiter", str, "exp", "delimiter"),
    "data.log": ("--log", optional_bool, "exp", "log_transform"),
    "data.n": ("--n", int, "synth", "n"),
    "data.d": ("--d", int, "synth", "d"),
    "data.sep": ("--sep", float, "synth", "separability"),
    "data.informative": ("--informative", int, "synth", "n_informative"),
    "data.clusters": ("--clusters", int, "synth", "n_clusters_per_class"),
    "data.flip": ("--flip", float, "synth", "flip_fraction"),
    "data.unlabeled_frac": ("--unlabeled-frac", float, "exp", "unlabeled_frac"),
    "train.lambda": ("--lambda", float, "train", "lam"),
    "train.eta": ("--eta", float, "train", "eta"),
    "train.gamma": ("--gamma", float, "train", "gamma"),
    "train.epochs": ("--epochs", int, "train", "epochs"),
    "train.batch": ("--batch", int, "train", "batch_size"),
    "train.hidden": ("--hidden", int, "train", "hidden"),
    "train.scheduler": ("--scheduler", str, "train", "scheduler"),
    "train.step_factor": ("--step-factor", float, "train", "step_factor"),
    "train.step_every": ("--step-every", int, "train", "step_every"),
    "train.project_every_epoch": ("--project-every-epoch", parse_bool, "train", "project_every_epoch"),
    "graph.knn": ("--knn", int, "exp", "knn"),
    "graph.alpha": ("--alpha", float, "exp", "alpha"),
    "graph.tol": ("--graph-tol", float, "exp", "graph_tol"),
    "graph.max_iter": ("--graph-max-iter", int, "exp", "graph_max_iter"),
    "run.seeds": ("--seeds", int_list, "exp", "seeds"),
    "run.methods": ("--methods", str_list, "exp", "methods"),
    "run.f1_average": ("--f1-average", str, "exp", "f1_average"),
    "run.out_dir": ("--out-dir", str, "exp", "out_dir"),
    "run.overwrite": ("--overwrite", parse_bool, "exp", "overwrite"),
    "run.artifacts": ("--artifacts", parse_bool, "exp", "artifacts"),
}
FLAG_TO_KEY = {flag: key for key, (flag, *_) in OPTIONS.items()}
BOOL_PARSERS = (parse_bool, optional_bool)


def read_config_file(path) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        values[key] = value
    return values


def build_config(settings: dict) -> ExperimentConfig:
    """``settings`` maps config keys to already-parsed or raw string values."""
    exp, synth, train = {}, {}, {}
    targets = {"exp": exp, "synth": synth, "train": train}
    for key, value in settings.items():
        _, parser, section, attr = OPTIONS[key]
        if isinstance(value, str):
            try:
                value = parser(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        targets[section][attr] = value
    cfg = ExperimentConfig(**exp)
    cfg.synth = replace(SynthConfig(), **synth)
    cfg.train = replace(TrainConfig(), **train)
    return cfg


def _add_experiment_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file (e.g. train.gamma=0.001)")
    for key, (flag, parser, _, _) in OPTIONS.items():
        kwargs = dict(dest=key, type=parser, default=argparse.SUPPRESS, help=f"config key {key}")
        if parser in BOOL_PARSERS:
            kwargs.update(nargs="?", const=True)
        p.add_argument(flag, **kwargs)


def _settings(args) -> dict:
    settings = read_config_file(args.config) if getattr(args, "config", None) else {}
    settings.update({k: v for k, v in vars(args).items() if k in OPTIONS})
    return settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssae", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("synth-gen", help="write a synthetic dataset as CSV")
    gen.add_argument("--output", "-o", required=True)
    gen.add_argument("--n", type=int, default=1000)
    gen.add_argument("--d", type=int, default=1000)
    gen.add_argument("--sep", type=float, default=0.8)
    gen.add_argument("--informative", type=int, default=8)
    gen.add_argument("--clusters", type=int, default=1)
    gen.add_argument("--flip", type=float, default=0.01)
    gen.add_argument("--seed", type=int, default=0)

    run = sub.add_parser("run", help="run all methods over all seeds")
    _add_experiment_options(run)

    for name, what in (("sweep-sep", "separability"), ("sweep-informative", "n_informative")):
        sp = sub.add_parser(name, help=f"accuracy as a function of {what}")
        _add_experiment_options(sp)
        sp.add_argument("--values", type=float_list, required=True,
                        help="comma separated list of values")

    ex = sub.add_parser("export", help="re-render latent and weight artifacts of a run")
    ex.add_argument("--run-dir", required=True)
    ex.add_argument("--out-dir", default=None)
    ex.add_argument("--overwrite", type=parse_bool, nargs="?", const=True, default=False)
    return parser


def _dispatch(args) -> int:
    if args.command == "synth-gen":
        cfg = SynthConfig(n=args.n, d=args.d, separability=args.sep, n_informative=args.informative,
                          n_clusters_per_class=args.clusters, flip_fraction=args.flip, seed=args.seed)
        write_csv(generate_synthetic(cfg), args.output)
        print(f"wrote {cfg.n} x {cfg.d} dataset to {args.output}")
        return 0
    if args.command == "export":
        files = export_from_run(args.run_dir, args.out_dir, args.overwrite)
        for key, path in sorted(files.items()):
            print(f"{key}: {path}")
        return 0

    cfg = build_config(_settings(args))
    if args.command == "run":
        report, bundle = run_experiment(cfg)
        print(format_table(report))
        print(f"\nartifacts in {bundle.root}")
        return 0
    param = "separability" if args.command == "sweep-sep" else "n_informative"
    rows = sweep(cfg, param, args.values)
    print(f"{len(rows)} rows written to {Path(cfg.out_dir) / f'sweep_{param}.csv'}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _dispatch(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, SSAEError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
