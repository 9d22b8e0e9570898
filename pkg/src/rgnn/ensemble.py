"""Ensembles of independently wired networks under majority voting.

Each member draws its own connection probability (pairwise distinct) and
its own seed stream, trains on the same data, and votes per sample; the
modal label wins, ties falling to the lowest label index. Reports carry
per-member accuracies, the average and minimum test errors in percent,
and the joint-vote accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .network import ArchConfig, RgnnModel, TrainResult, predict, train_rgnn
from .features import fit_sae
from .solver import AdmmConfig

__all__ = [
    "EnsembleConfig",
    "EnsembleReport",
    "sample_probabilities",
    "train_ensemble",
    "majority_vote",
    "evaluate_ensemble",
    "report_from_predictions",
    "sweep_member_counts",
    "write_ensemble_csv",
    "write_sweep_csv",
]

DUPLICATE_RESOLUTION = 1e-9


@dataclass(frozen=True)
class EnsembleConfig:
    member_count: int
    base_arch: ArchConfig
    p_low: float = 0.1
    p_high: float = 0.9
    master_seed: int = 0
    share_sae: bool = True

    def __post_init__(self) -> None:
        if self.member_count < 1:
            raise ValueError(f"member_count must be >= 1, got {self.member_count}")
        if not (0.0 < self.p_low < self.p_high < 1.0):
            raise ValueError(
                f"need 0 < p_low < p_high < 1, got p_low={self.p_low}, p_high={self.p_high}"
            )


@dataclass(frozen=True)
class EnsembleReport:
    member_p: tuple[float, ...]
    member_accuracy: tuple[float, ...] | None = None
    ate: float | None = None  # average test error, percent
    mte: float | None = None  # minimum test error, percent
    joint_accuracy: float | None = None
    joint_beats_fraction: float | None = None


def _streams(cfg: EnsembleConfig):
    ss = np.random.SeedSequence(cfg.master_seed)
    probs_ss, sae_ss, members_ss = ss.spawn(3)
    return probs_ss, sae_ss, members_ss.spawn(cfg.member_count)


def sample_probabilities(cfg: EnsembleConfig) -> tuple[float, ...]:
    """Uniform draws on [p_low, p_high], redrawing any value that lands
    within 1e-9 of an earlier one; deterministic under master_seed."""
    probs_ss, _, _ = _streams(cfg)
    rng = np.random.default_rng(probs_ss)
    out: list[float] = []
    while len(out) < cfg.member_count:
        candidate = float(rng.uniform(cfg.p_low, cfg.p_high))
        if all(abs(candidate - p) > DUPLICATE_RESOLUTION for p in out):
            out.append(candidate)
    return tuple(out)


def train_ensemble(
    X,
    labels,
    cfg: EnsembleConfig,
    solver_config: AdmmConfig,
) -> tuple[list[RgnnModel], EnsembleReport]:
    """Train member_count networks, each with its own p and seed stream.

    The encoder is fit once and shared unless ``share_sae`` is off. A
    failing member propagates; members are never silently dropped.
    """
    ps = sample_probabilities(cfg)
    _, sae_ss, member_seeds = _streams(cfg)
    shared = None
    if cfg.share_sae:
        shared = fit_sae(
            np.asarray(X, dtype=float),
            cfg.base_arch.sae_hidden,
            cfg.base_arch.sae_lambda,
            sae_ss,
            solver_config=solver_config,
        )
    models = []
    for p, member_ss in zip(ps, member_seeds):
        arch = replace(cfg.base_arch, connection_probability=p)
        result: TrainResult = train_rgnn(X, labels, arch, solver_config, member_ss, sae=shared)
        models.append(result.model)
    return models, EnsembleReport(member_p=ps)


def majority_vote(member_predictions) -> np.ndarray:
    """Per-sample modal label over the member rows; ties break to the
    lowest label index."""
    preds = np.asarray(member_predictions)
    if preds.dtype == object or preds.ndim != 2:
        raise ValueError("member predictions must form a rectangular members x N matrix")
    if preds.shape[0] < 1:
        raise ValueError("need at least one member")
    preds = preds.astype(np.int64)
    if preds.size and preds.min() < 0:
        raise ValueError("labels must be non-negative")
    n = preds.shape[1]
    c = int(preds.max()) + 1 if preds.size else 1
    votes = np.zeros((c, n), dtype=np.int64)
    cols = np.arange(n)
    for row in preds:
        np.add.at(votes, (row, cols), 1)
    return np.argmax(votes, axis=0)


def report_from_predictions(preds, labels_test, member_p) -> EnsembleReport:
    """Assemble the report from a members x N label matrix."""
    preds = np.asarray(preds)
    labels_test = np.asarray(labels_test)
    accs = (preds == labels_test).mean(axis=1)
    errors = (1.0 - accs) * 100.0
    joint = majority_vote(preds)
    joint_acc = float(np.mean(joint == labels_test))
    return EnsembleReport(
        member_p=tuple(float(p) for p in member_p),
        member_accuracy=tuple(float(a) for a in accs),
        ate=float(errors.mean()),
        mte=float(errors.min()),
        joint_accuracy=100.0 * joint_acc,
        joint_beats_fraction=float(np.mean(joint_acc > accs)),
    )


def evaluate_ensemble(models, X_test, labels_test) -> EnsembleReport:
    """Per-member accuracies, ATE/MTE in percent, and the joint-vote accuracy."""
    labels_test = np.asarray(labels_test)
    if labels_test.size == 0:
        raise ValueError("empty test set")
    if not models:
        raise ValueError("need at least one model")
    preds = np.stack([predict(m, X_test)[0] for m in models])
    return report_from_predictions(preds, labels_test, [_member_p(m) for m in models])


def _member_p(model: RgnnModel) -> float:
    p = model.arch.connection_probability
    return p[0] if isinstance(p, (tuple, list)) else p


def sweep_member_counts(models, counts, X_test, labels_test) -> list[dict]:
    """Evaluate prefixes of the member list at each requested count."""
    rows = []
    for count in counts:
        if not (1 <= count <= len(models)):
            raise ValueError(f"count {count} outside 1..{len(models)}")
        report = evaluate_ensemble(models[:count], X_test, labels_test)
        rows.append(
            {"count": count, "ate": report.ate, "mte": report.mte, "joint": report.joint_accuracy}
        )
    return rows


def write_ensemble_csv(report: EnsembleReport, path) -> None:
    """``member,p,accuracy`` rows plus the summary ``JOINT,_,accuracy`` row."""
    if report.member_accuracy is None:
        raise ValueError("report has no accuracies; evaluate the ensemble first")
    lines = ["member,p,accuracy"]
    for i, (p, acc) in enumerate(zip(report.member_p, report.member_accuracy)):
        lines.append(f"{i},{repr(float(p))},{repr(float(acc))}")
    lines.append(f"JOINT,_,{repr(report.joint_accuracy / 100.0)}")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def write_sweep_csv(rows, path) -> None:
    lines = ["count,ate,mte,joint"]
    for row in rows:
        lines.append(
            f"{row['count']},{repr(float(row['ate']))},{repr(float(row['mte']))},{repr(float(row['joint']))}"
        )
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
