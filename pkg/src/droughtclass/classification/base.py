from __future__ import annotations

import numpy as np

from ..errors import DimensionError, EmptyInputError, InputError


def check_training(values, labels) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(getattr(values, "values", values), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    labels = np.asarray(labels)
    if len(values) == 0:
        raise EmptyInputError("empty training set")
    if len(labels) != len(values):
        raise DimensionError(f"{len(values)} rows but {len(labels)} labels")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == np.round(labels)):
            raise InputError("labels must be integer class ids")
        labels = labels.astype(np.int64)
    if labels.min() < 0:
        raise InputError("labels must be non-negative class ids")
    if not np.isfinite(values).all():
        raise InputError("training matrix contains non-finite values")
    return values, labels.astype(np.int64)


class Classifier:
    """Shared predict contract of the four classifier variants."""

    variant: str
    class_count: int
    n_features: int

    def _check_queries(self, values) -> np.ndarray:
        values = np.asarray(getattr(values, "values", values), dtype=float)
        if values.ndim == 1:
            values = values[None, :] if self.n_features > 1 or values.size == 1 else values[:, None]
        if values.shape[1] != self.n_features:
            raise DimensionError(f"expected {self.n_features} features, got {values.shape[1]}")
        return values

    def predict(self, values) -> np.ndarray:
        raise NotImplementedError

    def predict_one(self, query) -> int:
        query = np.atleast_1d(np.asarray(query, dtype=float))
        if query.shape != (self.n_features,):
            raise DimensionError(f"query has shape {query.shape}, expected ({self.n_features},)")
        return int(self.predict(query[None, :])[0])
