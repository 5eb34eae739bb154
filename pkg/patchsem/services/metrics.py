"""
Evaluation metrics: AUC, F1, Recall+/Recall-, TPR/FPR and confusion counts.

A score counts as a positive prediction when it is >= the threshold.
"""

import logging
from collections.abc import Sequence

import numpy as np
from sklearn.metrics import confusion_matrix, roc_auc_score

from patchsem.core.exceptions import PatchSemError
from patchsem.schemas.metrics import MetricsReport

logger = logging.getLogger(__name__)


class SingleClass(PatchSemError):
    """Raised when AUC is requested for labels of a single class."""

    pass


def _check_lengths(scores: Sequence[float], labels: Sequence[int]) -> None:
    if len(scores) != len(labels):
        raise ValueError(f"{len(scores)} scores but {len(labels)} labels")
    bad = [y for y in labels if y not in (0, 1)]
    if bad:
        raise ValueError(f"labels must be 0 or 1, got {bad[:3]}")


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Rank-based AUC: share of (positive, negative) pairs ranked correctly,
    ties counting one half.

    Raises:
        SingleClass: If either class is absent
    """
    _check_lengths(scores, labels)
    if len(set(labels)) < 2:
        raise SingleClass("AUC needs both positive and negative labels")
    return float(roc_auc_score(np.asarray(labels), np.asarray(scores, dtype=np.float64)))


def confusion(
    scores: Sequence[float], labels: Sequence[int], threshold: float = 0.5
) -> tuple[int, int, int, int]:
    """(tp, fp, tn, fn) with `score >= threshold` predicted positive."""
    _check_lengths(scores, labels)
    if not scores:
        return 0, 0, 0, 0
    predicted = (np.asarray(scores, dtype=np.float64) >= threshold).astype(int)
    tn, fp, fn, tp = confusion_matrix(np.asarray(labels), predicted, labels=[0, 1]).ravel()
    return int(tp), int(fp), int(tn), int(fn)


def _ratio(numerator: int | float, denominator: int | float, flag: str, flags: list[str]) -> float:
    if denominator == 0:
        flags.append(flag)
        return 0.0
    return float(numerator) / float(denominator)


def report(scores: Sequence[float], labels: Sequence[int], threshold: float = 0.5) -> MetricsReport:
    """
    Full metric suite at one threshold.

    Degenerate denominators yield 0 and add a flag; AUC is None (flagged
    `auc`) when a class is missing.
    """
    tp, fp, tn, fn = confusion(scores, labels, threshold)
    flags: list[str] = []

    precision = _ratio(tp, tp + fp, "precision", flags)
    recall_pos = _ratio(tp, tp + fn, "recall_pos", flags)
    recall_neg = _ratio(tn, tn + fp, "recall_neg", flags)
    fpr = fp / (fp + tn) if fp + tn else 0.0
    f1 = _ratio(2 * precision * recall_pos, precision + recall_pos, "f1", flags)

    try:
        auc_value: float | None = auc(scores, labels)
    except SingleClass:
        auc_value = None
        flags.append("auc")
        logger.debug("AUC omitted: only one class among %d records", len(labels))

    return MetricsReport(
        auc=auc_value,
        f1=f1,
        recall_pos=recall_pos,
        recall_neg=recall_neg,
        tpr=recall_pos,
        fpr=fpr,
        precision=precision,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        support_pos=tp + fn,
        support_neg=tn + fp,
        threshold=threshold,
        flags=flags,
    )
