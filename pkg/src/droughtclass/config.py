"""JSON run configuration with full defaulting.

Every key has a default except ``data.inputs``, which commands that read raw
files require.  Unknown keys are rejected so typos cannot silently fall back
to defaults.  The fully defaulted configuration is echoed into each run
manifest.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .errors import ConfigError
from .ingest import BOUNDING_BOX, DEFAULT_FILL_VALUE

DEFAULTS: dict = {
    "seed": 42,
    "n_jobs": 1,
    "data": {
        "inputs": None,
        "fill_value": DEFAULT_FILL_VALUE,
        "strict": False,
    },
    "features": {"include_identifiers": False},
    "kmeans": {"n_init": 10, "max_iter": 300, "tol": 1e-4},
    "elbow": {"k_min": 1, "k_max": 8},
    "bgm": {
        # None: fit at the selected cluster count
        "k_max": None,
        "alpha": 1.0,
        "max_iter": 1000,
        "tol": 1e-6,
        "reg_covar": 1e-6,
        "weight_floor": 0.02,
    },
    "silhouette": {"sample_cap": 10000},
    "cluster": {
        # None: use the detected elbow
        "k": None,
        # "auto" picks the higher silhouette (ties go to kmeans)
        "model": "auto",
    },
    "classify": {
        "ratio": 0.8,
        "k_neighbors": 5,
        "n_trees": 100,
        "max_features": None,
        "max_depth": None,
        "min_samples_split": 2,
        "min_samples_leaf": 1,
        "baseline_depth": 3,
    },
    "analyze": {
        "day_step": 1,
        "geo_shape": [63, 48],
        "bbox": list(BOUNDING_BOX),
        "geo_bandwidths": None,
        "geo_fallback_bandwidths": [0.25, 0.25],
        "severity": {
            "0": {"extremity": "Lower", "season": "Monsoon"},
            "1": {"extremity": "Higher", "season": "Winter"},
            "2": {"extremity": "Moderate", "season": "Transitional/Dry Season"},
        },
    },
    "synth": {
        "enabled": False,
        "preset": "default",
        "regimes": None,
    },
}

_OPEN_MAPPINGS = {("analyze", "severity")}


def _merge(base: dict, override: dict, path: tuple = ()) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = ".".join(path + (key,))
        if key not in base:
            raise ConfigError(f"unknown config key {where}")
        if path + (key,) in _OPEN_MAPPINGS:
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where} must be an object")
            out[key] = copy.deepcopy(value)
        elif isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where} must be an object")
            out[key] = _merge(base[key], value, path + (key,))
        else:
            out[key] = value
    return out


def resolve(overrides: dict | None = None) -> dict:
    """Defaults updated by ``overrides``; raises ConfigError naming a bad key."""
    cfg = _merge(DEFAULTS, overrides or {})
    _validate(cfg)
    return cfg


def load(path: str | Path | None) -> dict:
    if path is None:
        return resolve({})
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    return resolve(raw)


def require(cfg: dict, dotted: str):
    """Value at ``dotted``; ConfigError naming the key when it is unset."""
    node = cfg
    for part in dotted.split("."):
        if not isinstance(node, dict) or node.get(part) is None:
            raise ConfigError(f"missing config key {dotted}")
        node = node[part]
    if node in ([], ""):
        raise ConfigError(f"missing config key {dotted}")
    return node


def _check(cond: bool, key: str, what: str):
    if not cond:
        raise ConfigError(f"config key {key} {what}")


def _validate(cfg: dict) -> None:
    _check(isinstance(cfg["seed"], int) and cfg["seed"] >= 0, "seed", "must be a non-negative integer")
    _check(isinstance(cfg["n_jobs"], int) and cfg["n_jobs"] >= 1, "n_jobs", "must be a positive integer")
    inputs = cfg["data"]["inputs"]
    _check(inputs is None or isinstance(inputs, list), "data.inputs", "must be a list of paths")
    el = cfg["elbow"]
    _check(1 <= el["k_min"] <= el["k_max"], "elbow.k_max", "must satisfy 1 <= k_min <= k_max")
    _check(el["k_max"] - el["k_min"] >= 2, "elbow.k_max", "must span at least 3 values of k")
    _check(cfg["cluster"]["model"] in ("auto", "kmeans", "bgm"), "cluster.model", "must be auto, kmeans or bgm")
    _check(0 < cfg["classify"]["ratio"] < 1, "classify.ratio", "must lie in (0, 1)")
    _check(cfg["bgm"]["alpha"] > 0, "bgm.alpha", "must be positive")
    cap = cfg["silhouette"]["sample_cap"]
    _check(cap is None or (isinstance(cap, int) and cap >= 3), "silhouette.sample_cap", "must be an integer >= 3")
    _check(len(cfg["analyze"]["geo_shape"]) == 2, "analyze.geo_shape", "must be [n_lat, n_lon]")
    _check(len(cfg["analyze"]["bbox"]) == 4, "analyze.bbox", "must be [lat_min, lat_max, lon_min, lon_max]")
