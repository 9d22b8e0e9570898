"""Run configuration: a JSON file validated into typed config objects.

Every constraint violation raises ConfigError with the offending dotted
key in the message so CLI users can fix the file directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .ensemble import EnsembleConfig
from .errors import ConfigError
from .network import ArchConfig
from .solver import AdmmConfig

__all__ = ["DatasetConfig", "EnsembleSettings", "RunConfig", "load_run_config", "parse_run_config"]


@dataclass(frozen=True)
class DatasetConfig:
    kind: str  # "idx" | "csv"
    train_images: str | None = None
    train_labels: str | None = None
    test_images: str | None = None
    test_labels: str | None = None
    path: str | None = None
    label_column: int = 0
    has_header: bool = False
    test_fraction: float | None = None
    split_seed: int = 0
    stratified: bool = True
    limit_train: int | None = None


@dataclass(frozen=True)
class EnsembleSettings:
    member_count: int
    p_low: float = 0.1
    p_high: float = 0.9
    share_sae: bool = True
    sweep_counts: tuple[int, ...] | None = None


@dataclass(frozen=True)
class RunConfig:
    seed: int
    arch: ArchConfig
    solver: AdmmConfig
    dataset: DatasetConfig
    ensemble: EnsembleSettings | None = None
    batch_size: int | None = None
    epochs: int = 1
    out_dir: str | None = None


def _require(mapping, key, where):
    if key not in mapping:
        raise ConfigError(f"{where}.{key} is required")
    return mapping[key]


def _typed(mapping, key, where, kinds, default=None, required=False):
    if key not in mapping:
        if required:
            raise ConfigError(f"{where}.{key} is required")
        return default
    value = mapping[key]
    if kinds is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}.{key} must be a boolean, got {value!r}")
        return value
    if kinds is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}.{key} must be an integer, got {value!r}")
        return value
    if kinds is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
        return float(value)
    if kinds is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}.{key} must be a string, got {value!r}")
        return value
    raise AssertionError(f"unhandled kind {kinds}")


def _parse_dataset(section) -> DatasetConfig:
    if not isinstance(section, dict):
        raise ConfigError("dataset must be an object")
    where = "dataset"
    kind = _typed(section, "kind", where, str, required=True)
    if kind not in ("idx", "csv"):
        raise ConfigError(f"dataset.kind must be 'idx' or 'csv', got {kind!r}")
    ds = DatasetConfig(
        kind=kind,
        train_images=_typed(section, "train_images", where, str),
        train_labels=_typed(section, "train_labels", where, str),
        test_images=_typed(section, "test_images", where, str),
        test_labels=_typed(section, "test_labels", where, str),
        path=_typed(section, "path", where, str),
        label_column=_typed(section, "label_column", where, int, default=0),
        has_header=_typed(section, "has_header", where, bool, default=False),
        test_fraction=_typed(section, "test_fraction", where, float),
        split_seed=_typed(section, "split_seed", where, int, default=0),
        stratified=_typed(section, "stratified", where, bool, default=True),
        limit_train=_typed(section, "limit_train", where, int),
    )
    if kind == "idx":
        if ds.train_images is None or ds.train_labels is None:
            raise ConfigError("dataset.train_images and dataset.train_labels are required for kind 'idx'")
        if (ds.test_images is None) != (ds.test_labels is None):
            raise ConfigError("dataset.test_images and dataset.test_labels must be given together")
    else:
        if ds.path is None:
            raise ConfigError("dataset.path is required for kind 'csv'")
    if ds.test_fraction is not None and not (0.0 < ds.test_fraction < 1.0):
        raise ConfigError(f"dataset.test_fraction must be in (0, 1), got {ds.test_fraction}")
    if ds.limit_train is not None and ds.limit_train < 1:
        raise ConfigError(f"dataset.limit_train must be >= 1, got {ds.limit_train}")
    return ds


def _parse_arch(section) -> ArchConfig:
    if not isinstance(section, dict):
        raise ConfigError("architecture must be an object")
    where = "architecture"
    counts = _require(section, "neuron_counts", where)
    if not isinstance(counts, list) or not counts or not all(
        isinstance(c, int) and not isinstance(c, bool) for c in counts
    ):
        raise ConfigError("architecture.neuron_counts must be a non-empty list of integers")
    p = section.get("connection_probability", 0.5)
    if isinstance(p, list):
        p = tuple(float(v) for v in p)
    elif isinstance(p, (int, float)) and not isinstance(p, bool):
        p = float(p)
    else:
        raise ConfigError("architecture.connection_probability must be a number or list of numbers")
    kwargs = dict(
        neuron_counts=tuple(counts),
        connection_probability=p,
        d=_typed(section, "d", where, int, default=10),
        M=_typed(section, "M", where, int, default=5),
        sigma=_typed(section, "sigma", where, float, default=1.0),
        activation=_typed(section, "activation", where, str, default="tanh"),
        sae_hidden=_typed(section, "sae_hidden", where, int, default=128),
        sae_lambda=_typed(section, "sae_lambda", where, float, default=1e-3),
    )
    try:
        return ArchConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"architecture: {exc}") from exc


def _parse_solver(section) -> tuple[AdmmConfig, int | None, int]:
    section = section if section is not None else {}
    if not isinstance(section, dict):
        raise ConfigError("solver must be an object")
    where = "solver"
    kwargs = dict(
        rho=_typed(section, "rho", where, float, default=1.0),
        lam=_typed(section, "lambda", where, float, default=1e-3),
        max_iter=_typed(section, "max_iter", where, int, default=100),
        ema_enabled=_typed(section, "ema", where, bool, default=True),
        tail_window=_typed(section, "tail_window", where, int, default=10),
        tolerance=_typed(section, "tolerance", where, float, default=1e-6),
    )
    batch_size = _typed(section, "batch_size", where, int)
    epochs = _typed(section, "epochs", where, int, default=1)
    if batch_size is not None and batch_size < 1:
        raise ConfigError(f"solver.batch_size must be >= 1, got {batch_size}")
    if epochs < 1:
        raise ConfigError(f"solver.epochs must be >= 1, got {epochs}")
    try:
        return AdmmConfig(**kwargs), batch_size, epochs
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc


def _parse_ensemble(section) -> EnsembleSettings | None:
    if section is None:
        return None
    if not isinstance(section, dict):
        raise ConfigError("ensemble must be an object")
    where = "ensemble"
    counts = section.get("sweep_counts")
    if counts is not None:
        if not isinstance(counts, list) or not all(
            isinstance(c, int) and not isinstance(c, bool) and c >= 1 for c in counts
        ):
            raise ConfigError("ensemble.sweep_counts must be a list of positive integers")
        counts = tuple(counts)
    settings = EnsembleSettings(
        member_count=_typed(section, "member_count", where, int, required=True),
        p_low=_typed(section, "p_low", where, float, default=0.1),
        p_high=_typed(section, "p_high", where, float, default=0.9),
        share_sae=_typed(section, "share_sae", where, bool, default=True),
        sweep_counts=counts,
    )
    if settings.member_count < 1:
        raise ConfigError(f"ensemble.member_count must be >= 1, got {settings.member_count}")
    if not (0.0 < settings.p_low < settings.p_high < 1.0):
        raise ConfigError(
            f"ensemble: need 0 < p_low < p_high < 1, got {settings.p_low}, {settings.p_high}"
        )
    if settings.sweep_counts and max(settings.sweep_counts) > settings.member_count:
        raise ConfigError("ensemble.sweep_counts entries cannot exceed member_count")
    return settings


def parse_run_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be an object")
    seed = _typed(raw, "seed", "<top>", int, default=0)
    out_dir = _typed(raw, "out_dir", "<top>", str)
    solver, batch_size, epochs = _parse_solver(raw.get("solver"))
    return RunConfig(
        seed=seed,
        arch=_parse_arch(_require(raw, "architecture", "<top>")),
        solver=solver,
        dataset=_parse_dataset(_require(raw, "dataset", "<top>")),
        ensemble=_parse_ensemble(raw.get("ensemble")),
        batch_size=batch_size,
        epochs=epochs,
        out_dir=out_dir,
    )


def load_run_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_run_config(raw)
