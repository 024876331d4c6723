"""Brute-force-exact k-nearest-neighbour classifier.

A KD-tree proposes a short candidate list per query; exact squared
distances are then recomputed from coordinate differences and ranked by
(distance, training row index).  When the candidate list cannot prove that
it holds every point tied with the k-th neighbour, the query falls back to a
full linear scan, so results always equal the exhaustive definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from ..errors import InputError
from .base import Classifier, check_training

_SLACK = 8
_BLOCK = 2048


@dataclass(frozen=True, eq=False)
class KNNClassifier(Classifier):
    train: np.ndarray
    labels: np.ndarray
    k_neighbors: int
    class_count: int
    seed: int = 0
    variant = "knn"

    @property
    def n_features(self) -> int:
        return self.train.shape[1]

    @cached_property
    def _tree(self) -> cKDTree:
        return cKDTree(self.train)

    def neighbors(self, values) -> np.ndarray:
        """Training row indices of the k nearest neighbours, nearest first."""
        values = self._check_queries(values)
        n, k = len(self.train), self.k_neighbors
        kk = min(n, k + _SLACK)
        tree = self._tree
        out = np.empty((len(values), k), dtype=np.int64)
        for start in range(0, len(values), _BLOCK):
            q = values[start:start + _BLOCK]
            tree_d, idx = tree.query(q, k=kk)
            tree_d, idx = tree_d.reshape(len(q), kk), idx.reshape(len(q), kk)
            d2 = ((q[:, None, :] - self.train[idx]) ** 2).sum(axis=2)
            order = np.lexsort((idx, d2), axis=-1)
            best = np.take_along_axis(idx, order, axis=1)[:, :k]
            if kk < n:
                unsure = ~(tree_d[:, k - 1] * (1 + 1e-9) < tree_d[:, kk - 1])
                for row in np.flatnonzero(unsure):
                    best[row] = self._scan(q[row])
            out[start:start + len(q)] = best
        return out

    def _scan(self, query: np.ndarray) -> np.ndarray:
        d2 = ((self.train - query) ** 2).sum(axis=1)
        return np.lexsort((np.arange(len(d2)), d2))[: self.k_neighbors]

    def predict(self, values) -> np.ndarray:
        nb = self.neighbors(values)
        votes = np.zeros((len(nb), self.class_count), dtype=np.int64)
        np.add.at(votes, (np.repeat(np.arange(len(nb)), nb.shape[1]), self.labels[nb].ravel()), 1)
        return votes.argmax(axis=1)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "k_neighbors": self.k_neighbors,
            "class_count": self.class_count,
            "seed": self.seed,
            "train": self.train.tolist(),
            "labels": self.labels.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KNNClassifier":
        return cls(
            np.asarray(data["train"], dtype=float),
            np.asarray(data["labels"], dtype=np.int64),
            int(data["k_neighbors"]),
            int(data["class_count"]),
            int(data.get("seed", 0)),
        )


def knn_fit(train, labels, k_neighbors: int = 5, class_count: int | None = None) -> KNNClassifier:
    values, labels = check_training(train, labels)
    if not 1 <= k_neighbors <= len(values):
        raise InputError(f"k_neighbors must lie in [1, {len(values)}], got {k_neighbors}")
    count = int(class_count if class_count is not None else labels.max() + 1)
    return KNNClassifier(values.copy(), labels.copy(), int(k_neighbors), count)


def knn_predict(model: KNNClassifier, query) -> int:
    return model.predict_one(query)
