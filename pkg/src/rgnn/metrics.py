"""Classification evaluation: confusion counts, accuracy, per-class
precision/sensitivity, ROC and PR sweeps, trapezoidal AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfusionMatrix",
    "ClassStats",
    "CurveSeries",
    "confusion",
    "overall_accuracy",
    "per_class_stats",
    "roc_points",
    "pr_points",
    "trapezoid_auc",
    "write_confusion_csv",
    "write_curve_csv",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[t][p]: samples of true class t predicted as class p."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        c = self.counts
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"counts must be square, got shape {c.shape}")
        if np.any(c < 0):
            raise ValueError("counts must be non-negative")

    @property
    def class_count(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ClassStats:
    precision: float
    sensitivity: float
    precision_defined: bool
    sensitivity_defined: bool


@dataclass(frozen=True)
class CurveSeries:
    """Sweep points: thresholds strictly decreasing, (x, y) per threshold."""

    thresholds: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        if not (self.thresholds.shape == self.x.shape == self.y.shape):
            raise ValueError("thresholds, x, y must share a shape")
        if np.any(np.diff(self.thresholds) >= 0):
            raise ValueError("thresholds must be strictly decreasing")


def confusion(true_labels, predicted_labels, C: int) -> ConfusionMatrix:
    true_labels = np.asarray(true_labels, dtype=np.int64)
    predicted_labels = np.asarray(predicted_labels, dtype=np.int64)
    if true_labels.shape != predicted_labels.shape or true_labels.ndim != 1:
        raise ValueError("label vectors must be 1-D and equally long")
    for name, v in (("true", true_labels), ("predicted", predicted_labels)):
        if v.size and (v.min() < 0 or v.max() >= C):
            raise ValueError(f"{name} labels out of range 0..{C - 1}")
    counts = np.zeros((C, C), dtype=np.int64)
    np.add.at(counts, (true_labels, predicted_labels), 1)
    return ConfusionMatrix(counts)


def overall_accuracy(cm: ConfusionMatrix) -> float:
    """Trace over total; reduces to (TP+TN)/(TP+TN+FP+FN) for two classes."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


def per_class_stats(cm: ConfusionMatrix) -> list[ClassStats]:
    """Per class: precision = diag/col-sum, sensitivity = diag/row-sum.

    A 0/0 ratio is reported as 0.0 with the matching *_defined flag False.
    """
    out = []
    col = cm.counts.sum(axis=0)
    row = cm.counts.sum(axis=1)
    for c in range(cm.class_count):
        diag = int(cm.counts[c, c])
        p_def, s_def = col[c] > 0, row[c] > 0
        out.append(
            ClassStats(
                precision=diag / col[c] if p_def else 0.0,
                sensitivity=diag / row[c] if s_def else 0.0,
                precision_defined=bool(p_def),
                sensitivity_defined=bool(s_def),
            )
        )
    return out


def _binary_sweep(scores, true_labels):
    scores = np.asarray(scores, dtype=float)
    true_labels = np.asarray(true_labels)
    if scores.shape != true_labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D and equally long")
    pos = int(np.sum(true_labels == 1))
    neg = int(np.sum(true_labels == 0))
    if pos + neg != true_labels.size:
        raise ValueError("labels must be binary 0/1")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    hits = (true_labels[order] == 1).astype(np.int64)
    tp = np.cumsum(hits)
    fp = np.arange(1, scores.size + 1) - tp
    # keep the last index of each distinct score: all samples scoring >= t
    # are predicted positive at threshold t
    last = np.flatnonzero(np.diff(sorted_scores, append=-np.inf) != 0)
    return sorted_scores[last], tp[last], fp[last], pos, neg


def roc_points(scores, true_labels) -> CurveSeries:
    """(FPR, TPR) at every distinct score, with the (0, 0) and (1, 1) endpoints."""
    thresholds, tp, fp, pos, neg = _binary_sweep(scores, true_labels)
    if pos == 0 or neg == 0:
        from .errors import DataError

        raise DataError("ROC needs at least one positive and one negative sample")
    t = np.concatenate([[np.inf], thresholds])
    x = np.concatenate([[0.0], fp / neg])
    y = np.concatenate([[0.0], tp / pos])
    return CurveSeries(thresholds=t, x=x, y=y)


def pr_points(scores, true_labels) -> CurveSeries:
    """(recall, precision) at every distinct score."""
    thresholds, tp, fp, pos, _ = _binary_sweep(scores, true_labels)
    if pos == 0:
        from .errors import DataError

        raise DataError("PR needs at least one positive sample")
    recall = tp / pos
    precision = tp / (tp + fp)
    return CurveSeries(thresholds=thresholds, x=recall, y=precision)


def trapezoid_auc(curve: CurveSeries) -> float:
    return float(np.trapezoid(curve.y, curve.x))


def write_confusion_csv(cm: ConfusionMatrix, path) -> None:
    """``true,pred,count`` rows, all cells, row-major."""
    lines = ["true,pred,count"]
    for t in range(cm.class_count):
        for p in range(cm.class_count):
            lines.append(f"{t},{p},{cm.counts[t, p]}")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def write_curve_csv(curve: CurveSeries, path, class_label: int | None = None) -> None:
    """``threshold,x,y`` rows; a leading class column is added when
    emitting one-vs-rest curves for more than two classes."""
    header = "threshold,x,y" if class_label is None else "class,threshold,x,y"
    lines = [header]
    for t, x, y in zip(curve.thresholds, curve.x, curve.y):
        row = f"{repr(float(t))},{repr(float(x))},{repr(float(y))}"
        lines.append(row if class_label is None else f"{class_label},{row}")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def append_curve_csv(curve: CurveSeries, path, class_label: int, write_header: bool) -> None:
    mode = "w" if write_header else "a"
    with open(path, mode, encoding="utf-8") as f:
        if write_header:
            f.write("class,threshold,x,y\n")
        for t, x, y in zip(curve.thresholds, curve.x, curve.y):
            f.write(f"{class_label},{repr(float(t))},{repr(float(x))},{repr(float(y))}\n")
