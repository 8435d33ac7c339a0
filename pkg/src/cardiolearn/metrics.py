"""Confusion matrix, the scalar classification metrics, and rank-based ROC-AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    InsufficientDataError,
    ShapeError,
    UndefinedMetricError,
)


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts with class 1 ("at heart risk") as the positive class."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricReport:
    """Scalar metric bundle; ``degenerate`` names metrics that hit a 0/0 case."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float | None = None
    degenerate: tuple[str, ...] = ()

    def csv_row(self, algorithm: str) -> str:
        """One comparison-table row: algorithm plus the metric columns."""
        auc = repr(float(self.auc)) if self.auc is not None else ""
        return ",".join(
            [
                algorithm,
                repr(float(self.accuracy)),
                repr(float(self.precision)),
                repr(float(self.recall)),
                repr(float(self.f1)),
                auc,
            ]
        )


def _as_binary(name: str, values) -> np.ndarray:
    arr = np.asarray(values)
    if not np.isin(arr, (0, 1)).all():
        raise DomainError(f"{name} must contain only 0/1 values")
    return arr.astype(np.int64)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    """Count TP/FP/FN/TN for binary label vectors of equal length."""
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape or t.ndim != 1 or t.size < 1:
        raise ShapeError(f"label vectors must be equal-length 1-D, got {t.shape} and {p.shape}")
    t = _as_binary("y_true", t)
    p = _as_binary("y_pred", p)
    return ConfusionMatrix(
        tp=int(np.sum((t == 1) & (p == 1))),
        fp=int(np.sum((t == 0) & (p == 1))),
        fn=int(np.sum((t == 1) & (p == 0))),
        tn=int(np.sum((t == 0) & (p == 0))),
    )


def compute_metrics(cm: ConfusionMatrix) -> MetricReport:
    """Accuracy, precision, recall, and F1 from counts.

    A 0/0 denominator yields 0.0 and the metric's name in ``degenerate``
    rather than NaN, keeping reports machine-comparable.
    """
    if cm.total < 1:
        raise InsufficientDataError("confusion matrix has no counts")
    degenerate = []

    accuracy = (cm.tp + cm.tn) / cm.total
    if cm.tp + cm.fp > 0:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision = 0.0
        degenerate.append("precision")
    if cm.tp + cm.fn > 0:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall = 0.0
        degenerate.append("recall")
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        degenerate.append("f1")

    return MetricReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        degenerate=tuple(degenerate),
    )


def roc_auc(y_true, scores) -> float:
    """Probability that a random positive outscores a random negative, ties at 1/2.

    Computed from midranks (Mann-Whitney statistic), which is exact and
    equivalent to integrating the ROC curve with tie handling.
    """
    t = np.asarray(y_true)
    s = np.asarray(scores, dtype=np.float64)
    if t.shape != s.shape or t.ndim != 1:
        raise ShapeError(f"vectors must be equal-length 1-D, got {t.shape} and {s.shape}")
    t = _as_binary("y_true", t)
    n_pos = int(t.sum())
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs both classes present")

    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(t.size, dtype=np.float64)
    sorted_scores = s[order]
    i = 0
    while i < t.size:
        j = i
        while j < t.size and sorted_scores[j] == sorted_scores[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + 1 + j)  # midrank of the tie group
        i = j
    rank_sum = float(ranks[t == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
