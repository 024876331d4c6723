"""Deterministic relabeling of raw cluster ids by soil wetness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, InputError


@dataclass(frozen=True)
class ClusterLabeling:
    canonical_map: dict[int, int]
    basis_statistic: dict[int, float]

    def apply(self, assignments) -> np.ndarray:
        assignments = np.asarray(assignments)
        lookup = np.full(max(self.canonical_map) + 1, -1, dtype=np.int64)
        for raw, canon in self.canonical_map.items():
            lookup[raw] = canon
        out = lookup[assignments]
        if (out < 0).any():
            raise InputError("assignment refers to an unmapped cluster")
        return out

    def to_dict(self) -> dict:
        return {
            "canonical_map": {str(k): v for k, v in sorted(self.canonical_map.items())},
            "median_gwettop": {str(k): v for k, v in sorted(self.basis_statistic.items())},
        }


def canonicalize_labels(assignments, dataset) -> ClusterLabeling:
    """Rank clusters by descending median GWETTOP; canonical id 0 is the wettest.

    ``dataset`` is a :class:`~droughtclass.ingest.Dataset` or a GWETTOP array
    aligned with ``assignments``.  Equal medians keep raw-id order.
    """
    assignments = np.asarray(assignments)
    wet = dataset.column("GWETTOP") if hasattr(dataset, "column") else np.asarray(dataset, dtype=float)
    if len(wet) != len(assignments):
        raise DimensionError("assignments and dataset rows are not aligned")
    raw_ids = np.unique(assignments)
    if len(raw_ids) == 0:
        raise InputError("no assignments")
    if raw_ids.min() < 0:
        raise InputError("negative cluster id")
    missing = np.setdiff1d(np.arange(raw_ids.max() + 1), raw_ids)
    if len(missing):
        raise InputError(f"empty cluster(s): {missing.tolist()}")
    medians = {int(r): float(np.median(wet[assignments == r])) for r in raw_ids}
    order = sorted(medians, key=lambda r: (-medians[r], r))
    return ClusterLabeling({raw: canon for canon, raw in enumerate(order)}, medians)


def compact_labels(assignments) -> np.ndarray:
    """Renumber labels to 0..m-1 keeping their relative order (drops unused ids)."""
    return np.unique(np.asarray(assignments), return_inverse=True)[1]
