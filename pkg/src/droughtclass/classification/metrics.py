"""Confusion matrices (rows = actual class, columns = predicted class)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, EmptyInputError


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    @property
    def accuracy(self) -> float:
        return self.correct / self.total

    @property
    def class_count(self) -> int:
        return self.counts.shape[0]

    def to_dict(self) -> dict:
        return {
            "counts": self.counts.tolist(),
            "correct": self.correct,
            "total": self.total,
            "accuracy": self.accuracy,
        }


def confusion_from_predictions(actual, predicted, class_count: int) -> ConfusionMatrix:
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if len(actual) == 0:
        raise EmptyInputError("nothing to evaluate")
    if actual.shape != predicted.shape:
        raise DimensionError("actual and predicted labels differ in length")
    for name, arr in (("actual", actual), ("predicted", predicted)):
        if arr.min() < 0 or arr.max() >= class_count:
            raise DimensionError(f"{name} label outside [0, {class_count})")
    counts = np.bincount(actual * class_count + predicted, minlength=class_count**2)
    return ConfusionMatrix(counts.reshape(class_count, class_count))


def evaluate(model, test, labels) -> ConfusionMatrix:
    """Confusion matrix of ``model`` on a held-out matrix and its true labels."""
    values = np.asarray(getattr(test, "values", test), dtype=float)
    if len(values) == 0:
        raise EmptyInputError("empty test set")
    return confusion_from_predictions(labels, model.predict(values), model.class_count)
