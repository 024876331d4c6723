"""CART classification tree grown greedily on Gini impurity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, InputError
from .base import Classifier, check_training


def gini(class_counts) -> float:
    counts = np.asarray(class_counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise InputError("gini of an empty node is undefined")
    p = counts / total
    return float(1.0 - (p**2).sum())


def weighted_gini(left_counts, right_counts) -> float:
    """Child-size-weighted Gini impurity of a binary split."""
    left = np.asarray(left_counts, dtype=float)
    right = np.asarray(right_counts, dtype=float)
    nl, nr = left.sum(), right.sum()
    return float((nl * gini(left) + nr * gini(right)) / (nl + nr))


@dataclass(frozen=True, eq=False)
class DecisionTree(Classifier):
    """Flat-array tree; ``feature[i] == -1`` marks a leaf.

    Rows with ``x[feature] <= threshold`` go left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, class_count) training class counts per node
    n_features: int
    class_count: int
    params: dict
    seed: int = 0
    variant = "decision_tree"

    @property
    def depth(self) -> int:
        depth = np.zeros(len(self.feature), dtype=int)
        for i in range(len(self.feature)):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def leaf_values(self) -> np.ndarray:
        return self.counts.argmax(axis=1)

    def apply(self, values) -> np.ndarray:
        values = self._check_queries(values)
        node = np.zeros(len(values), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = values[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active[rows] = self.feature[node[rows]] >= 0
        return node

    def predict(self, values) -> np.ndarray:
        return self.leaf_values()[self.apply(values)]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
            "n_features": self.n_features,
            "class_count": self.class_count,
            "params": self.params,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionTree":
        return cls(
            np.asarray(data["feature"], dtype=np.int64),
            np.asarray(data["threshold"], dtype=float),
            np.asarray(data["left"], dtype=np.int64),
            np.asarray(data["right"], dtype=np.int64),
            np.asarray(data["counts"], dtype=np.int64).reshape(len(data["feature"]), int(data["class_count"])),
            int(data["n_features"]),
            int(data["class_count"]),
            dict(data["params"]),
            int(data.get("seed", 0)),
        )


def _best_split_on(x: np.ndarray, y: np.ndarray, class_count: int, min_leaf: int):
    """Lowest weighted impurity (scaled by node size) over midpoints of one feature.

    Returns ``(score, threshold)`` or None when no admissible split exists.
    """
    n = len(x)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    pos = np.arange(min_leaf - 1, n - min_leaf)
    if len(pos) == 0:
        return None
    pos = pos[xs[pos] < xs[pos + 1]]
    if len(pos) == 0:
        return None
    onehot = np.zeros((n, class_count))
    onehot[np.arange(n), ys] = 1.0
    left = np.cumsum(onehot, axis=0)[pos]
    right = onehot.sum(axis=0) - left
    nl = (pos + 1).astype(float)
    nr = n - nl
    score = nl - (left**2).sum(axis=1) / nl + nr - (right**2).sum(axis=1) / nr
    best = int(np.argmin(score))
    i = pos[best]
    threshold = (xs[i] + xs[i + 1]) / 2.0
    if threshold >= xs[i + 1]:
        threshold = xs[i]
    return float(score[best]), float(threshold)


def grow_tree(
    values: np.ndarray,
    labels: np.ndarray,
    class_count: int,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    seed: int = 0,
) -> DecisionTree:
    """Grow one tree.  With ``max_features`` set, each split looks at a random
    feature subset drawn from ``rng`` (further features are tried only if none
    of the subset admits a split).
    """
    n, d = values.shape
    if n == 0:
        raise EmptyInputError("empty training set")
    if min_samples_split < 2 or min_samples_leaf < 1:
        raise InputError("min_samples_split must be >= 2 and min_samples_leaf >= 1")
    if max_features is not None and not 1 <= max_features <= d:
        raise InputError(f"max_features must lie in [1, {d}]")
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(rows):
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        counts.append(np.bincount(labels[rows], minlength=class_count))
        return len(feature) - 1

    stack = [(new_node(np.arange(n)), np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        m = len(rows)
        if (
            (counts[node] > 0).sum() <= 1
            or (max_depth is not None and depth >= max_depth)
            or m < min_samples_split
            or m < 2 * min_samples_leaf
        ):
            continue
        y = labels[rows]
        if max_features is None or max_features >= d:
            batches = [list(range(d))]
        else:
            perm = rng.permutation(d)
            batches = [sorted(perm[:max_features]), sorted(perm[max_features:])]
        best = None
        for batch in batches:
            for f in batch:
                found = _best_split_on(values[rows, f], y, class_count, min_samples_leaf)
                if found is not None and (best is None or found[0] < best[0]):
                    best = (found[0], f, found[1])
            if best is not None:
                break
        if best is None:
            continue
        _, f, thr = best
        mask = values[rows, f] <= thr
        lrows, rrows = rows[mask], rows[~mask]
        feature[node], threshold[node] = int(f), thr
        left[node] = new_node(lrows)
        right[node] = new_node(rrows)
        # right pushed first so the left subtree is numbered first
        stack.append((right[node], rrows, depth + 1))
        stack.append((left[node], lrows, depth + 1))

    params = {
        "max_depth": max_depth,
        "min_samples_split": min_samples_split,
        "min_samples_leaf": min_samples_leaf,
        "max_features": max_features,
    }
    return DecisionTree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(counts, dtype=np.int64).reshape(len(feature), class_count),
        d,
        class_count,
        params,
        seed,
    )


def dtree_fit(
    train,
    labels,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    class_count: int | None = None,
) -> DecisionTree:
    """Exhaustive greedy tree: every feature, every midpoint between distinct values.

    Split ties go to the lowest feature index, then the lowest threshold.
    """
    values, labels = check_training(train, labels)
    count = int(class_count if class_count is not None else labels.max() + 1)
    return grow_tree(values, labels, count, max_depth, min_samples_split, min_samples_leaf)
