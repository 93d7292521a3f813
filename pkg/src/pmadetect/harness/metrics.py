"""Binary classification metrics with PMA (label 1) as the positive class."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..errors import InputError, UndefinedAUC


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    tpr: float | None  # None when there are no positives
    fpr: float | None  # None when there are no negatives
    auc: float | None
    tp: int
    fn: int
    fp: int
    tn: int

    def as_row(self) -> dict:
        return {k: ("" if v is None else v) for k, v in asdict(self).items()}


METRIC_FIELDS = ("accuracy", "tpr", "fpr", "auc", "tp", "fn", "fp", "tn")


def auc_roc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Exact ROC AUC via the Mann-Whitney rank-sum; ties count one half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise InputError(f"{scores.size} scores for {labels.size} labels")
    n_pos = int(np.count_nonzero(labels == 1))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUC("AUC needs both positive and negative examples")

    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(scores.size)
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        # average 1-based rank of the tie group
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    rank_sum = ranks[labels == 1].sum()
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def compute_metrics(
    predictions: Sequence[int], labels: Sequence[int], scores: Sequence[float] | None = None
) -> Metrics:
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if predictions.shape != labels.shape or labels.size == 0:
        raise InputError(f"{predictions.size} predictions for {labels.size} labels")
    tp = int(np.sum((predictions == 1) & (labels == 1)))
    fn = int(np.sum((predictions == 0) & (labels == 1)))
    fp = int(np.sum((predictions == 1) & (labels == 0)))
    tn = int(np.sum((predictions == 0) & (labels == 0)))
    auc = None
    if scores is not None and tp + fn > 0 and fp + tn > 0:
        auc = auc_roc(scores, labels)
    return Metrics(
        accuracy=(tp + tn) / labels.size,
        tpr=tp / (tp + fn) if tp + fn else None,
        fpr=fp / (fp + tn) if fp + tn else None,
        auc=auc,
        tp=tp,
        fn=fn,
        fp=fp,
        tn=tn,
    )
