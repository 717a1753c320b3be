"""Multi-class precision/recall/F1 with per-class and macro views."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError


@dataclass
class MetricsReport:
    """Per-class metrics in class-index order, plus macro averages and accuracy."""

    precision: list[float]
    recall: list[float]
    f1: list[float]
    support: list[int]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    n_classes: int = field(default=0)

    def __post_init__(self):
        if self.n_classes == 0:
            self.n_classes = len(self.precision)

    def rows(self, class_names: list[str] | None = None):
        """Per-class rows as (name, precision, recall, f1, support), then Average."""
        names = class_names or [str(i) for i in range(self.n_classes)]
        out = [
            (names[i], self.precision[i], self.recall[i], self.f1[i], self.support[i])
            for i in range(self.n_classes)
        ]
        out.append(("Average", self.macro_precision, self.macro_recall, self.macro_f1,
                    int(sum(self.support))))
        return out

    def format_table(self, class_names: list[str] | None = None) -> str:
        lines = [f"{'Classes':<28}{'Prec.':>8}{'Recall':>8}{'F1':>8}{'Support':>9}"]
        for name, p, r, f1, support in self.rows(class_names):
            lines.append(f"{name:<28}{p:>8.2f}{r:>8.2f}{f1:>8.2f}{support:>9d}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "precision": list(map(float, self.precision)),
            "recall": list(map(float, self.recall)),
            "f1": list(map(float, self.f1)),
            "support": list(map(int, self.support)),
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsReport":
        return cls(**data)


def compute_metrics(predictions, golds, n_classes: int = 18) -> MetricsReport:
    """Compute per-class precision/recall/F1/support, macro averages, accuracy.

    predictions and golds hold class indices in 0..n_classes-1. Zero
    denominators yield 0 (precision with no predicted positives, recall
    with no gold positives, F1 when both are 0).
    """
    predictions = np.asarray(predictions, dtype=np.int64)
    golds = np.asarray(golds, dtype=np.int64)
    if predictions.shape != golds.shape or predictions.ndim != 1:
        raise ShapeError("predictions and golds must be 1-D lists of equal length")
    if predictions.size and (
        predictions.min() < 0 or predictions.max() >= n_classes
        or golds.min() < 0 or golds.max() >= n_classes
    ):
        raise ValueError(f"class values must lie in 0..{n_classes - 1}")

    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (golds, predictions), 1)
    tp = np.diag(confusion).astype(np.float64)
    predicted = confusion.sum(axis=0).astype(np.float64)
    actual = confusion.sum(axis=1).astype(np.float64)

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / np.where(denom > 0, denom, 1.0), 0.0)

    accuracy = float((predictions == golds).mean()) if predictions.size else 0.0
    return MetricsReport(
        precision=precision.tolist(),
        recall=recall.tolist(),
        f1=f1.tolist(),
        support=actual.astype(int).tolist(),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        accuracy=accuracy,
        n_classes=n_classes,
    )
