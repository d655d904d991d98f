"""Confusion-matrix metrics and the rank-statistic AUROC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ..errors import LengthMismatch

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "auroc")


@dataclass(frozen=True)
class EvalReport:
    """Precision, recall and F1 are 0.0 when their denominator is zero."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    auroc: float | None
    confusion: tuple[int, int, int, int]  # tp, fp, tn, fn
    cell_id: tuple[str, str, str] | None = None

    def metric(self, name: str) -> float | None:
        return getattr(self, name)


def auroc(scores, labels) -> float | None:
    """(sum of positive midranks - P(P+1)/2) / (P*N); None if a class is absent."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if s.shape != y.shape:
        raise LengthMismatch("scores and labels differ in length")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(s, method="average")
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def evaluate(scores, labels, threshold: float = 0.5, cell_id: tuple[str, str, str] | None = None) -> EvalReport:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    if s.shape != y.shape:
        raise LengthMismatch(f"{len(s)} scores for {len(y)} labels")
    if len(y) == 0:
        raise LengthMismatch("need at least one score")
    pred = s >= threshold
    pos = y == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    tn = int(np.sum(~pred & ~pos))
    fn = int(np.sum(~pred & pos))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(
        accuracy=(tp + tn) / len(y),
        precision=precision,
        recall=recall,
        f1=f1,
        auroc=auroc(s, y),
        confusion=(tp, fp, tn, fn),
        cell_id=cell_id,
    )
