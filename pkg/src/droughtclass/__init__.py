"""Drought-regime discovery and classification from daily satellite weather records."""

__version__ = "0.1.0"

from .errors import DroughtError  # noqa: E402
from .ingest import Dataset, WeatherRecord, ingest_files, merge_and_clean, parse_power_csv  # noqa: E402
from .preprocess import FeatureMatrix, correlation_matrix, select_features, split_train_test, standardize  # noqa: E402

__all__ = [
    "Dataset",
    "DroughtError",
    "FeatureMatrix",
    "WeatherRecord",
    "correlation_matrix",
    "ingest_files",
    "merge_and_clean",
    "parse_power_csv",
    "select_features",
    "split_train_test",
    "standardize",
]
