"""Silhouette coefficient with optional seeded subsampling."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DimensionError, InputError, UndefinedScoreError

_BLOCK_ELEMENTS = 4_000_000


def silhouette_samples(values, labels, rows=None) -> np.ndarray:
    """Per-point silhouette of ``rows`` (default: all) against the full dataset.

    ``a`` is the mean distance to the other members of the point's own
    cluster, ``b`` the smallest mean distance to another cluster.  Points in a
    singleton cluster score 0.
    """
    values = np.asarray(getattr(values, "values", values), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    labels = np.asarray(labels)
    if len(labels) != len(values):
        raise DimensionError("labels and points differ in length")
    uniq, codes = np.unique(labels, return_inverse=True)
    if len(uniq) < 2:
        raise UndefinedScoreError("silhouette needs at least 2 clusters")
    rows = np.arange(len(values)) if rows is None else np.asarray(rows)
    k = len(uniq)
    sizes = np.bincount(codes, minlength=k).astype(float)
    onehot = np.zeros((len(values), k))
    onehot[np.arange(len(values)), codes] = 1.0

    out = np.empty(len(rows))
    step = max(1, _BLOCK_ELEMENTS // max(len(values), 1))
    for start in range(0, len(rows), step):
        idx = rows[start:start + step]
        dist = cdist(values[idx], values)
        sums = dist @ onehot
        own = codes[idx]
        own_size = sizes[own]
        a = sums[np.arange(len(idx)), own] / np.maximum(own_size - 1, 1)
        means = sums / sizes
        means[np.arange(len(idx)), own] = np.inf
        b = means.min(axis=1)
        denom = np.maximum(a, b)
        s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
        out[start:start + step] = np.where(own_size > 1, s, 0.0)
    return out


def silhouette_score(values, labels, sample_cap: int | None = 10_000, seed: int = 0) -> float:
    """Mean silhouette; above ``sample_cap`` rows a seeded uniform sample is scored."""
    values = np.asarray(getattr(values, "values", values), dtype=float)
    n = len(values)
    if n < 3:
        raise InputError(f"silhouette needs at least 3 rows, got {n}")
    rows = None
    if sample_cap is not None and n > sample_cap:
        rows = np.sort(np.random.default_rng(seed).choice(n, size=sample_cap, replace=False))
    return float(silhouette_samples(values, labels, rows).mean())
