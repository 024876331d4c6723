"""Random forest: bootstrap-sampled trees with per-split feature subsampling."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from .base import Classifier, check_training
from .tree import DecisionTree, grow_tree


@dataclass(frozen=True, eq=False)
class RandomForest(Classifier):
    trees: tuple[DecisionTree, ...]
    n_features: int
    class_count: int
    params: dict
    seed: int = 0
    variant = "random_forest"

    def votes(self, values) -> np.ndarray:
        values = self._check_queries(values)
        votes = np.zeros((len(values), self.class_count), dtype=np.int64)
        rows = np.arange(len(values))
        for tree in self.trees:
            votes[rows, tree.predict(values)] += 1
        return votes

    def predict(self, values) -> np.ndarray:
        return self.votes(values).argmax(axis=1)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "n_features": self.n_features,
            "class_count": self.class_count,
            "params": self.params,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RandomForest":
        return cls(
            tuple(DecisionTree.from_dict(t) for t in data["trees"]),
            int(data["n_features"]),
            int(data["class_count"]),
            dict(data["params"]),
            int(data.get("seed", 0)),
        )


def rf_fit(
    train,
    labels,
    n_trees: int = 100,
    max_features: int | None = None,
    seed: int = 0,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    bootstrap: bool = True,
    class_count: int | None = None,
    n_jobs: int = 1,
) -> RandomForest:
    """Fit ``n_trees`` trees, each from its own child seed of ``seed``.

    ``max_features`` defaults to ceil(sqrt(n_features)).  Results do not depend
    on ``n_jobs``.
    """
    values, labels = check_training(train, labels)
    if n_trees < 1:
        raise InputError("n_trees must be at least 1")
    n, d = values.shape
    if max_features is None:
        max_features = math.ceil(math.sqrt(d))
    count = int(class_count if class_count is not None else labels.max() + 1)
    children = np.random.SeedSequence(seed).spawn(n_trees)

    def build(child):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, n) if bootstrap else np.arange(n)
        return grow_tree(
            values[rows], labels[rows], count, max_depth, min_samples_split, min_samples_leaf,
            max_features, rng, seed,
        )

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            trees = tuple(pool.map(build, children))
    else:
        trees = tuple(build(c) for c in children)
    params = {
        "n_trees": n_trees,
        "max_features": max_features,
        "max_depth": max_depth,
        "min_samples_split": min_samples_split,
        "min_samples_leaf": min_samples_leaf,
        "bootstrap": bootstrap,
    }
    return RandomForest(trees, d, count, params, seed)
