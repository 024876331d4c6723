"""Lloyd's K-means with k-means++ seeding, WCSS and the elbow sweep."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, InputError, NumericalError

_CHUNK = 8192


@dataclass(frozen=True)
class KMeansModel:
    k: int
    centroids: np.ndarray
    inertia: float
    assignments: np.ndarray
    iterations_run: int
    seed: int
    inertia_trace: tuple[float, ...] = ()

    def predict(self, values: np.ndarray) -> np.ndarray:
        return nearest_centroid(values, self.centroids)[0]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "centroids": self.centroids.tolist(),
            "inertia": self.inertia,
            "iterations_run": self.iterations_run,
            "seed": self.seed,
        }


def _as_values(matrix) -> np.ndarray:
    values = getattr(matrix, "values", matrix)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return values


def nearest_centroid(values: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of and squared distance to the nearest centroid for every row.

    Distances are summed from exact coordinate differences, so ties resolve
    to the lowest centroid index exactly as a linear scan would.
    """
    values = _as_values(values)
    centroids = np.asarray(centroids, dtype=float).reshape(-1, values.shape[1]) if centroids.ndim == 1 else centroids
    if values.shape[1] != centroids.shape[1]:
        raise DimensionError(f"points have {values.shape[1]} features, centroids {centroids.shape[1]}")
    labels = np.empty(len(values), dtype=np.int64)
    dists = np.empty(len(values))
    for start in range(0, len(values), _CHUNK):
        block = values[start:start + _CHUNK]
        d2 = ((block[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        idx = d2.argmin(axis=1)
        labels[start:start + _CHUNK] = idx
        dists[start:start + _CHUNK] = d2[np.arange(len(block)), idx]
    return labels, dists


def assign(point, model: KMeansModel) -> int:
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.shape != (model.centroids.shape[1],):
        raise DimensionError(f"point has shape {point.shape}, centroids have {model.centroids.shape[1]} features")
    return int(nearest_centroid(point[None, :], model.centroids)[0][0])


def wcss(matrix, assignments, centroids) -> float:
    """Within-cluster sum of squared distances."""
    values = _as_values(matrix)
    assignments = np.asarray(assignments)
    centroids = np.asarray(centroids, dtype=float)
    if centroids.ndim == 1:
        centroids = centroids[:, None]
    if len(assignments) != len(values) or centroids.shape[1] != values.shape[1]:
        raise DimensionError("assignments, points and centroids have inconsistent shapes")
    if len(assignments) and (assignments.min() < 0 or assignments.max() >= len(centroids)):
        raise DimensionError("assignment refers to a missing centroid")
    return float(((values - centroids[assignments]) ** 2).sum())


def _plus_plus(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(values)
    centers = np.empty((k, values.shape[1]))
    centers[0] = values[rng.integers(n)]
    closest = ((values - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every point already coincides with a center
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[j] = values[idx]
        closest = np.minimum(closest, ((values - centers[j]) ** 2).sum(axis=1))
    return centers


def _means(values: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    counts = np.bincount(labels, minlength=k).astype(float)
    sums = np.column_stack([np.bincount(labels, weights=col, minlength=k) for col in values.T])
    return sums / counts[:, None]


def _repair_empty(values: np.ndarray, labels: np.ndarray, dists: np.ndarray, k: int) -> np.ndarray:
    """Give each empty cluster the point currently farthest from its centroid."""
    counts = np.bincount(labels, minlength=k)
    if counts.all():
        return labels
    labels = labels.copy()
    dists = dists.copy()
    for empty in np.flatnonzero(counts == 0):
        movable = counts[labels] > 1
        candidates = np.where(movable, dists, -1.0)
        far = int(np.argmax(candidates))
        counts[labels[far]] -= 1
        labels[far] = empty
        counts[empty] = 1
        dists[far] = 0.0
    return labels


def _lloyd(values: np.ndarray, k: int, rng: np.random.Generator, max_iter: int, tol: float):
    centroids = _plus_plus(values, k, rng)
    labels, dists = nearest_centroid(values, centroids)
    labels = _repair_empty(values, labels, dists, k)
    centroids = _means(values, labels, k)
    trace = [wcss(values, labels, centroids)]
    iterations = 1
    while iterations < max_iter:
        new_labels, dists = nearest_centroid(values, centroids)
        new_labels = _repair_empty(values, new_labels, dists, k)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = _means(values, labels, k)
        inertia = wcss(values, labels, centroids)
        iterations += 1
        prev = trace[-1]
        if inertia > prev * (1 + 1e-12) + 1e-12:
            raise NumericalError(f"Lloyd iteration increased inertia from {prev} to {inertia}")
        trace.append(inertia)
        if prev == 0 or (prev - inertia) / prev < tol:
            break
    # final labels must agree with the returned centroids
    final, dists = nearest_centroid(values, centroids)
    if not np.array_equal(final, labels) and np.bincount(final, minlength=k).all():
        labels = final
        trace.append(float(dists.sum()))
    return centroids, labels, trace[-1], iterations, tuple(trace)


def kmeans_fit(
    matrix,
    k: int,
    seed: int = 0,
    n_init: int = 10,
    max_iter: int = 300,
    tol: float = 1e-4,
    n_jobs: int = 1,
) -> KMeansModel:
    """Best of ``n_init`` seeded Lloyd runs by final inertia (ties: earliest run).

    Each run stops when the relative inertia improvement drops below ``tol``,
    when assignments stop changing, or after ``max_iter`` iterations.
    """
    values = _as_values(matrix)
    n = len(values)
    if not np.isfinite(values).all():
        raise InputError("matrix contains non-finite values")
    if not 1 <= k <= n:
        raise InputError(f"k must lie in [1, {n}], got {k}")
    if n_init < 1 or max_iter < 1:
        raise InputError("n_init and max_iter must be positive")
    children = np.random.SeedSequence(seed).spawn(n_init)

    def run(child):
        return _lloyd(values, k, np.random.default_rng(child), max_iter, tol)

    if n_jobs > 1 and n_init > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            runs = list(pool.map(run, children))
    else:
        runs = [run(c) for c in children]
    best = min(range(n_init), key=lambda i: (runs[i][2], i))
    centroids, labels, inertia, iterations, trace = runs[best]
    return KMeansModel(k, centroids, float(inertia), labels, iterations, seed, trace)


def elbow_sweep(matrix, k_min: int = 1, k_max: int = 8, seed: int = 0, **kwargs) -> list[tuple[int, float]]:
    """(k, inertia) for every k in ``[k_min, k_max]``, each k fitted best-of-n_init.

    If a larger k lands in a worse local optimum than the previous k, the
    previous solution is also grown by one centroid (placed on its farthest
    point) and refined; the better of the two solutions is reported, which
    keeps the curve non-increasing.
    """
    values = _as_values(matrix)
    if k_min < 1 or k_max > len(values) or k_min > k_max:
        raise InputError(f"invalid k range [{k_min}, {k_max}] for {len(values)} rows")
    pairs = []
    prev = None
    for k in range(k_min, k_max + 1):
        model = kmeans_fit(values, k, seed=seed, **kwargs)
        if prev is not None and model.inertia > prev.inertia:
            grown = _grow(values, prev, kwargs.get("max_iter", 300))
            if grown.inertia < model.inertia:
                model = grown
        pairs.append((k, model.inertia))
        prev = model
    return pairs


def _grow(values: np.ndarray, model: KMeansModel, max_iter: int) -> KMeansModel:
    _, dists = nearest_centroid(values, model.centroids)
    centroids = np.vstack([model.centroids, values[int(np.argmax(dists))]])
    k = len(centroids)
    labels, dists = nearest_centroid(values, centroids)
    labels = _repair_empty(values, labels, dists, k)
    for it in range(max_iter):
        centroids = _means(values, labels, k)
        new, dists = nearest_centroid(values, centroids)
        new = _repair_empty(values, new, dists, k)
        if np.array_equal(new, labels):
            break
        labels = new
    return KMeansModel(k, centroids, wcss(values, labels, centroids), labels, it + 1, model.seed)


def detect_elbow(pairs) -> int:
    """k with the largest discrete second difference of inertia (ties: smallest k)."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise InputError("elbow detection needs at least 3 (k, inertia) pairs")
    ks = [int(k) for k, _ in pairs]
    if any(b - a != 1 for a, b in zip(ks, ks[1:])):
        raise InputError("k values must be consecutive")
    inertia = np.array([float(v) for _, v in pairs])
    curvature = inertia[:-2] - 2 * inertia[1:-1] + inertia[2:]
    return ks[1 + int(np.argmax(curvature))]
