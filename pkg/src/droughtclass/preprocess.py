"""Feature selection, standardization, correlation and the train/test split."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DimensionError, EmptyInputError, InsufficientDataError, InputError
from .ingest import DISTRICT, IDENTIFIERS, WEATHER_PARAMETERS, Dataset


@dataclass(frozen=True)
class Scaling:
    """Per-feature location and scale; ``std`` is 1 for constant columns."""

    mean: np.ndarray
    std: np.ndarray

    def transform(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.mean.shape[0]:
            raise DimensionError(f"expected {self.mean.shape[0]} features, got {values.shape[-1]}")
        return (values - self.mean) / self.std

    def inverse_transform(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=float) * self.std + self.mean

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Scaling":
        return cls(np.asarray(data["mean"], dtype=float), np.asarray(data["std"], dtype=float))


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    feature_names: tuple[str, ...]
    row_keys: pd.DataFrame
    scaling: Scaling | None = None

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.feature_names):
            raise DimensionError(
                f"matrix shape {self.values.shape} does not match {len(self.feature_names)} feature names"
            )
        if len(set(self.feature_names)) != len(self.feature_names):
            raise InputError("duplicate feature names")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def take(self, rows: np.ndarray) -> "FeatureMatrix":
        return replace(self, values=self.values[rows], row_keys=self.row_keys.iloc[rows].reset_index(drop=True))


def select_features(dataset: Dataset, include_identifiers: bool = False) -> FeatureMatrix:
    """Pull the 11 weather parameters (plus LAT/LON/YEAR/DOY if asked) as a float matrix.

    Row keys (district, year, doy) follow the dataset's row order.
    """
    if len(dataset) == 0:
        raise EmptyInputError("dataset is empty")
    names = (IDENTIFIERS if include_identifiers else ()) + WEATHER_PARAMETERS
    values = dataset.frame[list(names)].to_numpy(dtype=float)
    keys = dataset.frame[[DISTRICT, "YEAR", "DOY"]].reset_index(drop=True)
    return FeatureMatrix(values, tuple(names), keys)


def fit_scaling(values: np.ndarray) -> Scaling:
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 2:
        raise InsufficientDataError(f"standardizing needs at least 2 rows, got {values.shape[0]}")
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    constant = np.all(values == values[0], axis=0)
    std = np.where(constant | (std == 0), 1.0, std)
    return Scaling(mean, std)


def standardize(matrix: FeatureMatrix, scaling: Scaling | None = None) -> FeatureMatrix:
    """Z-score every column with the population standard deviation.

    Pass a stored ``scaling`` to transform unseen rows with the training
    statistics instead of refitting.
    """
    if matrix.scaling is not None:
        raise InputError("matrix is already scaled")
    scaling = scaling if scaling is not None else fit_scaling(matrix.values)
    return replace(matrix, values=scaling.transform(matrix.values), scaling=scaling)


def correlation_matrix(matrix: FeatureMatrix | np.ndarray) -> np.ndarray:
    """Pearson correlation; a constant column correlates 0 with the rest and 1 with itself."""
    values = matrix.values if isinstance(matrix, FeatureMatrix) else np.asarray(matrix, dtype=float)
    if values.shape[0] < 2:
        raise InsufficientDataError("correlation needs at least 2 rows")
    centered = values - values.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    constant = np.all(values == values[0], axis=0) | (norms == 0)
    safe = np.where(constant, 1.0, norms)
    unit = centered / safe
    corr = unit.T @ unit
    corr = np.clip((corr + corr.T) / 2, -1.0, 1.0)
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    np.fill_diagonal(corr, 1.0)
    return corr


def write_correlation_csv(corr: np.ndarray, names, path: str | Path) -> Path:
    frame = pd.DataFrame(corr, index=list(names), columns=list(names))
    frame.index.name = "feature"
    frame.to_csv(path, lineterminator="\n")
    return Path(path)


@dataclass(frozen=True)
class SplitIndices:
    train_rows: np.ndarray
    test_rows: np.ndarray
    seed: int
    ratio: float


def split_train_test(n_rows: int, ratio: float = 0.8, seed: int = 0) -> SplitIndices:
    """Seeded uniform shuffle, then the first ``round(ratio * n_rows)`` rows train."""
    if not 0 < ratio < 1:
        raise InputError(f"ratio must lie in (0, 1), got {ratio}")
    if n_rows < 2:
        raise InsufficientDataError(f"cannot split {n_rows} rows")
    n_train = int(round(ratio * n_rows))
    if n_train == 0 or n_train == n_rows:
        raise InsufficientDataError(f"ratio {ratio} leaves one side of a {n_rows}-row split empty")
    order = np.random.default_rng(seed).permutation(n_rows)
    return SplitIndices(np.sort(order[:n_train]), np.sort(order[n_train:]), seed, ratio)
