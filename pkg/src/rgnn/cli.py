"""Command-line entry points.

Subcommands: gen-graph, train, eval, ensemble, sweep. File outputs land
under --out: model.rgnn, trace.csv, confusion.csv, roc.csv, pr.csv,
ensemble.csv, sweep.csv, report.json. Exit codes: 0 success, 1 config
error, 2 data error, 3 numeric failure, 4 model-file error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import DatasetConfig, RunConfig, parse_run_config
from .data import LabeledDataset, load_csv, load_idx, split
from .ensemble import (
    EnsembleConfig,
    evaluate_ensemble,
    sweep_member_counts,
    train_ensemble,
    write_ensemble_csv,
    write_sweep_csv,
)
from .errors import ConfigError, DataError, ModelFormatError, NumericError
from .graph import generate_random_dag, graph_to_text
from .metrics import (
    append_curve_csv,
    confusion,
    overall_accuracy,
    per_class_stats,
    pr_points,
    roc_points,
    write_confusion_csv,
    write_curve_csv,
)
from .model_io import load_model, save_model
from .network import predict, scores_to_probabilities, train_rgnn
from .solver import MinibatchResult, SolveResult, write_trace_csv

__all__ = ["main", "cmd_train", "cmd_eval", "cmd_ensemble", "cmd_sweep", "cmd_gen_graph"]


def _apply_overrides(raw: dict, args) -> dict:
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        dotted, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        target = raw
        keys = dotted.split(".")
        for key in keys[:-1]:
            target = target.setdefault(key, {})
            if not isinstance(target, dict):
                raise ConfigError(f"--set cannot descend into non-object at {key!r}")
        target[keys[-1]] = value
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        raw["out_dir"] = args.out
    return raw


def _load_config(args) -> RunConfig:
    try:
        with open(args.config, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {args.config}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.config}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_run_config(_apply_overrides(raw, args))


def _out_dir(cfg: RunConfig) -> Path:
    if cfg.out_dir is None:
        raise ConfigError("out_dir is required (set it in the config or pass --out)")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_datasets(ds: DatasetConfig) -> tuple[LabeledDataset, LabeledDataset | None]:
    if ds.kind == "idx":
        train = load_idx(ds.train_images, ds.train_labels)
        test = load_idx(ds.test_images, ds.test_labels) if ds.test_images else None
    else:
        full = load_csv(ds.path, ds.label_column, ds.has_header)
        if ds.test_fraction is not None:
            train, test = split(full, ds.test_fraction, ds.split_seed, ds.stratified)
        else:
            train, test = full, None
    if ds.limit_train is not None and ds.limit_train < len(train):
        train = train.subset(np.arange(ds.limit_train))
    return train, test


def _write_report(out: Path, accuracy: float, stats, evaluated_on: str, extra=None) -> None:
    payload = {
        "accuracy": accuracy,
        "evaluated_on": evaluated_on,
        "per_class": [
            {
                "precision": s.precision,
                "precision_defined": s.precision_defined,
                "sensitivity": s.sensitivity,
                "sensitivity_defined": s.sensitivity_defined,
            }
            for s in stats
        ],
    }
    if extra:
        payload.update(extra)
    with open(out / "report.json", "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _emit_metrics(out: Path, labels_true, labels_pred, scores, class_count: int) -> None:
    cm = confusion(labels_true, labels_pred, class_count)
    write_confusion_csv(cm, out / "confusion.csv")
    probs = scores_to_probabilities(scores)
    if class_count == 2:
        write_curve_csv(roc_points(probs[:, 1], labels_true), out / "roc.csv")
        write_curve_csv(pr_points(probs[:, 1], labels_true), out / "pr.csv")
    else:
        for c in range(class_count):
            binary = (np.asarray(labels_true) == c).astype(int)
            append_curve_csv(roc_points(probs[:, c], binary), out / "roc.csv", c, write_header=(c == 0))
            append_curve_csv(pr_points(probs[:, c], binary), out / "pr.csv", c, write_header=(c == 0))


def cmd_gen_graph(args) -> int:
    g = generate_random_dag(args.n, args.p, args.seed)
    text = graph_to_text(g)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg)
    train, test = _load_datasets(cfg.dataset)

    result = train_rgnn(
        train.samples,
        train.labels,
        cfg.arch,
        cfg.solver,
        cfg.seed,
        batch_size=cfg.batch_size,
        epochs=cfg.epochs,
    )
    save_model(result.model, out / "model.rgnn")
    _write_trace(result.trace, out / "trace.csv")

    eval_ds, evaluated_on = (test, "test") if test is not None else (train, "train")
    labels_pred, scores = predict(result.model, eval_ds.samples)
    cm = confusion(eval_ds.labels, labels_pred, result.model.class_count)
    accuracy = overall_accuracy(cm)
    write_confusion_csv(cm, out / "confusion.csv")
    _write_report(out, accuracy, per_class_stats(cm), evaluated_on, extra={"seed": cfg.seed})
    print(f"trained model -> {out / 'model.rgnn'}")
    print(f"{evaluated_on} accuracy: {accuracy:.4f}")
    return 0


def _write_trace(trace, path) -> None:
    if isinstance(trace, SolveResult):
        write_trace_csv(trace, path)
    elif isinstance(trace, MinibatchResult):
        lines = ["epoch,cost"]
        lines += [f"{i + 1},{repr(float(c))}" for i, c in enumerate(trace.epoch_costs)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_eval(args) -> int:
    model = load_model(args.model)
    if args.images:
        ds = load_idx(args.images, args.labels)
    elif args.csv:
        ds = load_csv(args.csv, args.label_column, args.has_header)
    else:
        raise ConfigError("eval needs either --images/--labels or --csv")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    labels_pred, scores = predict(model, ds.samples)
    cm = confusion(ds.labels, labels_pred, model.class_count)
    accuracy = overall_accuracy(cm)
    _emit_metrics(out, ds.labels, labels_pred, scores, model.class_count)
    _write_report(out, accuracy, per_class_stats(cm), "eval")
    print(f"accuracy: {accuracy:.4f}")
    return 0


def _ensemble_common(args):
    cfg = _load_config(args)
    if cfg.ensemble is None:
        raise ConfigError("this command needs an 'ensemble' config section")
    out = _out_dir(cfg)
    train, test = _load_datasets(cfg.dataset)
    eval_ds = test if test is not None else train

    ens_cfg = EnsembleConfig(
        member_count=cfg.ensemble.member_count,
        base_arch=cfg.arch,
        p_low=cfg.ensemble.p_low,
        p_high=cfg.ensemble.p_high,
        master_seed=cfg.seed,
        share_sae=cfg.ensemble.share_sae,
    )
    models, _ = train_ensemble(train.samples, train.labels, ens_cfg, cfg.solver)
    return cfg, out, models, eval_ds


def cmd_ensemble(args) -> int:
    cfg, out, models, eval_ds = _ensemble_common(args)
    report = evaluate_ensemble(models, eval_ds.samples, eval_ds.labels)
    write_ensemble_csv(report, out / "ensemble.csv")
    if cfg.ensemble.sweep_counts:
        rows = sweep_member_counts(models, cfg.ensemble.sweep_counts, eval_ds.samples, eval_ds.labels)
        write_sweep_csv(rows, out / "sweep.csv")
    print(f"joint accuracy: {report.joint_accuracy / 100.0:.4f}")
    print(f"mean member accuracy: {np.mean(report.member_accuracy):.4f}")
    return 0


def cmd_sweep(args) -> int:
    cfg, out, models, eval_ds = _ensemble_common(args)
    if not cfg.ensemble.sweep_counts:
        raise ConfigError("sweep needs ensemble.sweep_counts")
    rows = sweep_member_counts(models, cfg.ensemble.sweep_counts, eval_ds.samples, eval_ds.labels)
    write_sweep_csv(rows, out / "sweep.csv")
    for row in rows:
        print(f"count {row['count']}: ate {row['ate']:.2f}% mte {row['mte']:.2f}% joint {row['joint']:.2f}%")
    return 0


def _add_config_options(sub) -> None:
    sub.add_argument("config", help="path to the JSON run configuration")
    sub.add_argument("--out", help="output directory (overrides out_dir)")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override any config key, e.g. --set solver.lambda=0.01")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rgnn", description="randomly wired random-feature classifiers")
    subs = parser.add_subparsers(dest="command", required=True)

    g = subs.add_parser("gen-graph", help="sample a random DAG and print its text form")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_graph)

    t = subs.add_parser("train", help="train a single model from a config")
    _add_config_options(t)
    t.set_defaults(func=cmd_train)

    e = subs.add_parser("eval", help="evaluate a saved model on a dataset")
    e.add_argument("model", help="path to model.rgnn")
    e.add_argument("--out", required=True)
    e.add_argument("--images")
    e.add_argument("--labels")
    e.add_argument("--csv")
    e.add_argument("--label-column", dest="label_column", type=int, default=0)
    e.add_argument("--has-header", dest="has_header", action="store_true")
    e.set_defaults(func=cmd_eval)

    n = subs.add_parser("ensemble", help="train and jointly evaluate an ensemble")
    _add_config_options(n)
    n.set_defaults(func=cmd_ensemble)

    s = subs.add_parser("sweep", help="emit the error-vs-member-count table")
    _add_config_options(s)
    s.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ModelFormatError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
