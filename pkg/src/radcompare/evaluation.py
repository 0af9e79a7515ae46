"""Score-vs-ground-truth evaluation over the 0..10 class grid.

Predictions and truths are rounded half-up to integer classes; precision,
recall and F1 are macro-averaged over the classes present in the truth
labels, with zero-division resolving to 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

NUM_CLASSES = 11


class Scale(enum.Enum):
    """Whether scores live in [0,1] or [0,10]."""

    UNIT = "unit"
    TEN = "ten"


def round_to_class(score: float, scale: Scale) -> int:
    """Map a score to its integer class 0..10, rounding half-up.

    Unit-scale scores are multiplied by 10 first. Rounding applies to the
    actual float value, so binary representation decides exact .5 cases.
    """
    if scale is Scale.UNIT:
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"score {score} out of range for unit scale")
        value = score * 10.0
    else:
        if not 0.0 <= score <= 10.0:
            raise ValueError(f"score {score} out of range for ten scale")
        value = score
    return min(max(math.floor(value + 0.5), 0), 10)


@dataclass(frozen=True, slots=True)
class EvalSummary:
    """Aggregate agreement between predicted and ground-truth classes."""

    n: int
    accuracy: float
    accuracy_pm1: float
    precision: float
    recall: float
    f1: float
    confusion: tuple[tuple[int, ...], ...]
    pred_histogram: tuple[int, ...]
    truth_histogram: tuple[int, ...]


def evaluate(
    preds: Sequence[float], truths: Sequence[float], scale: Scale
) -> EvalSummary:
    """Metrics for one method's predictions against 0-10 ground truth.

    `scale` applies to the predictions; truths are always on the 0-10 scale.
    """
    if len(preds) != len(truths):
        raise ValueError(f"length mismatch: {len(preds)} predictions, {len(truths)} truths")
    n = len(preds)
    if n == 0:
        raise ValueError("empty input")

    pred_classes = [round_to_class(p, scale) for p in preds]
    truth_classes = [round_to_class(t, Scale.TEN) for t in truths]

    confusion = [[0] * NUM_CLASSES for _ in range(NUM_CLASSES)]
    for t, p in zip(truth_classes, pred_classes):
        confusion[t][p] += 1

    accuracy = sum(confusion[c][c] for c in range(NUM_CLASSES)) / n
    accuracy_pm1 = sum(
        1 for t, p in zip(truth_classes, pred_classes) if abs(t - p) <= 1
    ) / n

    present = sorted(set(truth_classes))
    precisions, recalls, f1s = [], [], []
    for c in present:
        tp = confusion[c][c]
        pred_count = sum(confusion[r][c] for r in range(NUM_CLASSES))
        truth_count = sum(confusion[c])
        precision = tp / pred_count if pred_count else 0.0
        recall = tp / truth_count if truth_count else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)

    return EvalSummary(
        n=n,
        accuracy=accuracy,
        accuracy_pm1=accuracy_pm1,
        precision=sum(precisions) / len(present),
        recall=sum(recalls) / len(present),
        f1=sum(f1s) / len(present),
        confusion=tuple(tuple(row) for row in confusion),
        pred_histogram=_histogram(pred_classes),
        truth_histogram=_histogram(truth_classes),
    )


def _histogram(classes: Sequence[int]) -> tuple[int, ...]:
    bins = [0] * NUM_CLASSES
    for c in classes:
        bins[c] += 1
    return tuple(bins)


def score_distribution(scores: Sequence[float], scale: Scale) -> tuple[int, ...]:
    """Counts per rounded class 0..10; counts sum to len(scores)."""
    if not scores:
        raise ValueError("empty input")
    return _histogram([round_to_class(s, scale) for s in scores])


def confusion_csv(summary: EvalSummary) -> str:
    """Confusion matrix as CSV, rows = truth class, columns = predicted."""
    header = "truth/pred," + ",".join(str(c) for c in range(NUM_CLASSES))
    rows = [header]
    for t in range(NUM_CLASSES):
        rows.append(str(t) + "," + ",".join(str(v) for v in summary.confusion[t]))
    return "\n".join(rows) + "\n"


def histogram_csv(summary: EvalSummary) -> str:
    """Prediction and truth class counts as CSV."""
    rows = ["class,pred_count,truth_count"]
    for c in range(NUM_CLASSES):
        rows.append(f"{c},{summary.pred_histogram[c]},{summary.truth_histogram[c]}")
    return "\n".join(rows) + "\n"
