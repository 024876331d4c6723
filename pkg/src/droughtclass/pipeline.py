"""Pipeline stages that read and write run artifacts.

Each stage takes the resolved configuration and a :class:`Run`, which owns
the output directory, records every file written (with its SHA-256) and the
per-stage wall time, and finally writes the run manifest.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .classification import audit_reference, dtree_fit, evaluate, gnb_fit, knn_fit, rf_fit
from .clustering import (
    bgm_fit,
    canonicalize_labels,
    compact_labels,
    detect_elbow,
    elbow_sweep,
    kmeans_fit,
    silhouette_score,
)
from .config import require
from .density import (
    boxplot_frame,
    daywise_density,
    district_shares,
    geo_density,
    label_severity,
    profile_clusters,
)
from .errors import InputError, UndefinedScoreError
from .ingest import DISTRICT, Dataset, ingest_files, read_dataset, write_dataset, write_power_csv
from .preprocess import correlation_matrix, select_features, split_train_test, standardize, write_correlation_csv
from .synthgen import generate_preset, load_regimes, save_regimes

log = logging.getLogger(__name__)

DATASET = "dataset.csv"
ASSIGNMENTS = "assignments.csv"


def sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dump_json(obj, path: Path) -> Path:
    path.write_text(json.dumps(_jsonable(obj), indent=2) + "\n")
    return path


class Run:
    """Output directory bookkeeping for one CLI invocation."""

    def __init__(self, out_dir: str | Path, config: dict, command: str):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.command = command
        self.outputs: list[Path] = []
        self.inputs: list[Path] = []
        self.timings: dict[str, float] = {}
        self.notes: dict = {}

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def record_output(self, path: Path) -> Path:
        path = Path(path)
        if path not in self.outputs:
            self.outputs.append(path)
        return path

    def record_input(self, path: Path) -> None:
        path = Path(path)
        if path not in self.inputs:
            self.inputs.append(path)

    def write_csv(self, frame: pd.DataFrame, name: str, index: bool = False) -> Path:
        p = self.path(name)
        frame.to_csv(p, index=index, lineterminator="\n")
        return self.record_output(p)

    def write_json(self, obj, name: str) -> Path:
        return self.record_output(dump_json(obj, self.path(name)))

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        log.info("stage %s started", name)
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - start, 6)

    def _display(self, path: Path) -> str:
        try:
            return path.resolve().relative_to(self.out_dir.resolve()).as_posix()
        except ValueError:
            return str(path)

    def manifest(self) -> dict:
        cfg = self.config
        return {
            "command": self.command,
            "version": __version__,
            "config": cfg,
            "seeds": {
                "master": cfg["seed"],
                "synth": cfg["seed"],
                "kmeans": cfg["seed"],
                "bgm": cfg["seed"],
                "silhouette_sample": cfg["seed"],
                "split": cfg["seed"],
                "random_forest": cfg["seed"],
            },
            "features": {"include_identifiers": cfg["features"]["include_identifiers"]},
            "hyperparameters": {
                key: cfg[key] for key in ("kmeans", "elbow", "bgm", "silhouette", "cluster", "classify")
            },
            "inputs": [{"path": self._display(p), "sha256": sha256(p)} for p in self.inputs],
            "outputs": [{"path": self._display(p), "sha256": sha256(p)} for p in self.outputs],
            "notes": self.notes,
            "timings": self.timings,
        }

    def finish(self, name: str = "manifest.json") -> Path:
        path = self.path(name)
        dump_json(self.manifest(), path)
        return path


# -- loading helpers ---------------------------------------------------------


def load_assignments(path: str | Path, dataset: Dataset) -> np.ndarray:
    """Canonical cluster per dataset row, joined on (district, year, doy)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"assignments file {path} not found")
    table = pd.read_csv(path, dtype={DISTRICT: str})
    for col in (DISTRICT, "YEAR", "DOY", "cluster"):
        if col not in table.columns:
            raise InputError(f"{path}: missing column {col}")
    keys = dataset.frame[[DISTRICT, "YEAR", "DOY"]]
    joined = keys.merge(table, on=[DISTRICT, "YEAR", "DOY"], how="left", validate="one_to_one")
    if joined["cluster"].isna().any():
        raise InputError(f"{path}: {int(joined['cluster'].isna().sum())} dataset rows have no assignment")
    return joined["cluster"].to_numpy(dtype=np.int64)


def _dataset_for(run: Run, dataset_path: str | Path | None) -> Dataset:
    path = Path(dataset_path) if dataset_path else run.out_dir / DATASET
    if not path.exists():
        raise InputError(f"dataset file {path} not found; run ingest first or pass --dataset")
    if path not in run.outputs:
        run.record_input(path)
    return read_dataset(path)


# -- stages ------------------------------------------------------------------


def stage_synth(cfg: dict, run: Run) -> list[Path]:
    """Write synthetic district files plus ground-truth regime tags."""
    with run.stage("synth"):
        scfg = cfg["synth"]
        regimes = None
        if scfg["regimes"]:
            run.record_input(Path(scfg["regimes"]))
            regimes = load_regimes(scfg["regimes"])
        data = generate_preset(scfg["preset"], seed=cfg["seed"], regimes=regimes)
        frame = data.dataset.frame
        files = []
        for district, part in frame.groupby(DISTRICT, sort=True):
            p = run.path(f"synthetic/{district}.csv")
            write_power_csv(part, p, cfg["data"]["fill_value"])
            files.append(run.record_output(p))
        truth = frame[[DISTRICT, "YEAR", "DOY"]].copy()
        truth["regime"] = np.asarray(data.regime_names)[data.regime]
        truth["regime_id"] = data.regime
        run.write_csv(truth, "synthetic/regimes.csv")
        run.record_output(save_regimes(data.regimes, run.path("synthetic/regime_spec.json")))
        run.notes["synthetic_rows"] = len(frame)
    return files


def stage_ingest(cfg: dict, run: Run, inputs=None) -> Dataset:
    with run.stage("ingest"):
        paths = [Path(p) for p in (inputs if inputs else require(cfg, "data.inputs"))]
        for p in paths:
            if not p.exists():
                raise InputError(f"input file {p} not found")
            if p not in run.outputs:
                run.record_input(p)
        dataset = ingest_files(
            paths, cfg["data"]["fill_value"], strict=cfg["data"]["strict"], n_jobs=cfg["n_jobs"]
        )
        run.record_output(write_dataset(dataset, run.path(DATASET)))
        run.notes["cleaning"] = dataset.cleaning.to_dict()
        run.notes["district_count"] = dataset.district_count
    return dataset


def stage_cluster(cfg: dict, run: Run, dataset: Dataset) -> np.ndarray:
    """Elbow sweep, K-means and BGM at the chosen k, silhouette comparison."""
    with run.stage("cluster"):
        seed, jobs = cfg["seed"], cfg["n_jobs"]
        km_cfg, el_cfg, bg_cfg = cfg["kmeans"], cfg["elbow"], cfg["bgm"]
        features = select_features(dataset, cfg["features"]["include_identifiers"])
        matrix = standardize(features)
        n = matrix.n_rows
        k_max = min(el_cfg["k_max"], n)
        pairs = elbow_sweep(matrix, el_cfg["k_min"], k_max, seed=seed, n_jobs=jobs, **km_cfg)
        detected = detect_elbow(pairs)
        k = cfg["cluster"]["k"] or detected
        run.write_csv(pd.DataFrame(pairs, columns=["k", "inertia"]), "elbow.csv")

        km = kmeans_fit(matrix, k, seed=seed, n_jobs=jobs, **km_cfg)
        bgm = bgm_fit(
            matrix,
            k_max=bg_cfg["k_max"] or k,
            alpha=bg_cfg["alpha"],
            seed=seed,
            max_iter=bg_cfg["max_iter"],
            tol=bg_cfg["tol"],
            reg_covar=bg_cfg["reg_covar"],
            weight_floor=bg_cfg["weight_floor"],
        )
        raw = {"kmeans": km.assignments, "bgm": compact_labels(bgm.assignments)}
        cap = cfg["silhouette"]["sample_cap"]
        scores = {}
        for name, labels in raw.items():
            try:
                scores[name] = silhouette_score(matrix, labels, sample_cap=cap, seed=seed)
            except UndefinedScoreError:
                scores[name] = None
        choice = cfg["cluster"]["model"]
        if choice == "auto":
            bgm_score = scores["bgm"] if scores["bgm"] is not None else -np.inf
            km_score = scores["kmeans"] if scores["kmeans"] is not None else -np.inf
            choice = "bgm" if bgm_score > km_score else "kmeans"
        labeling = canonicalize_labels(raw[choice], dataset)
        canonical = labeling.apply(raw[choice])

        sil = pd.DataFrame(
            {"model": ["K-Means Clustering", "Bayesian Gaussian Mixture"],
             "key": ["kmeans", "bgm"],
             "silhouette": [scores["kmeans"], scores["bgm"]],
             "selected": [choice == "kmeans", choice == "bgm"]}
        )
        run.write_csv(sil, "silhouette.csv")
        out = dataset.frame[[DISTRICT, "YEAR", "DOY"]].copy()
        out["cluster"] = canonical
        run.write_csv(out, ASSIGNMENTS)
        run.write_json(
            {
                "selected_model": choice,
                "k": k,
                "detected_k": detected,
                "feature_names": list(matrix.feature_names),
                "include_identifiers": cfg["features"]["include_identifiers"],
                "scaling": matrix.scaling.to_dict(),
                "kmeans": km.to_dict(),
                "bgm": bgm.to_dict(),
                "canonical": labeling.to_dict(),
                "silhouette": {"kmeans": scores["kmeans"], "bgm": scores["bgm"], "sample_cap": cap, "seed": seed},
                "seed": seed,
                "hyperparameters": {"kmeans": km_cfg, "elbow": el_cfg, "bgm": bg_cfg},
            },
            "model.json",
        )
        run.notes["cluster"] = {"detected_k": detected, "k": k, "selected_model": choice, "silhouette": scores}
    return canonical


def _classifier_params(cc: dict) -> dict:
    return {
        "knn": {"k_neighbors": cc["k_neighbors"]},
        "gaussian_nb": {"var_smoothing": 1e-9},
        "decision_tree": {
            "max_depth": cc["max_depth"],
            "min_samples_split": cc["min_samples_split"],
            "min_samples_leaf": cc["min_samples_leaf"],
        },
        "random_forest": {
            "n_trees": cc["n_trees"],
            "max_features": cc["max_features"],
            "max_depth": cc["max_depth"],
            "min_samples_split": cc["min_samples_split"],
            "min_samples_leaf": cc["min_samples_leaf"],
        },
    }


def stage_classify(cfg: dict, run: Run, dataset: Dataset, clusters: np.ndarray) -> dict:
    """80:20 split, four classifiers plus a shallow-tree baseline, confusion matrices."""
    with run.stage("classify"):
        cc, seed = cfg["classify"], cfg["seed"]
        matrix = standardize(select_features(dataset, cfg["features"]["include_identifiers"]))
        clusters = np.asarray(clusters, dtype=np.int64)
        count = int(clusters.max()) + 1
        split = split_train_test(matrix.n_rows, cc["ratio"], seed)
        xtr, ytr = matrix.values[split.train_rows], clusters[split.train_rows]
        xte, yte = matrix.values[split.test_rows], clusters[split.test_rows]
        params = _classifier_params(cc)
        split_params = {k: v for k, v in params["decision_tree"].items()}
        models = {
            "decision_tree": dtree_fit(xtr, ytr, class_count=count, **split_params),
            "random_forest": rf_fit(
                xtr, ytr, seed=seed, class_count=count, n_jobs=cfg["n_jobs"], **params["random_forest"]
            ),
            "knn": knn_fit(xtr, ytr, cc["k_neighbors"], class_count=count),
            "gaussian_nb": gnb_fit(xtr, ytr, class_count=count),
        }
        baseline = dtree_fit(xtr, ytr, max_depth=cc["baseline_depth"], class_count=count)
        results = {name: evaluate(m, xte, yte) for name, m in models.items()}
        base_cm = evaluate(baseline, xte, yte)

        rows = []
        for name, cm in results.items():
            for actual in range(count):
                row = {"classifier": name, "actual": actual}
                row.update({f"predicted_{p}": int(cm.counts[actual, p]) for p in range(count)})
                row["accuracy"] = cm.accuracy
                rows.append(row)
        run.write_csv(pd.DataFrame(rows), "confusion_matrices.csv")
        audit = audit_reference()
        run.write_csv(
            pd.DataFrame(
                [{"classifier": k, "correct": v["correct"], "total": v["total"],
                  "computed_accuracy": v["computed_accuracy"], "reported_accuracy": v["reported_accuracy"],
                  "flagged": v["flagged"]} for k, v in audit.items()]
            ),
            "reference_audit.csv",
        )
        report = {
            "split": {"ratio": cc["ratio"], "seed": seed, "n_train": len(split.train_rows),
                      "n_test": len(split.test_rows)},
            "class_count": count,
            "test_class_counts": np.bincount(yte, minlength=count).tolist(),
            "classifiers": {
                name: {**cm.to_dict(), "hyperparameters": params[name]} for name, cm in results.items()
            },
            "baseline": {
                "name": f"decision_tree_depth_{cc['baseline_depth']}",
                **base_cm.to_dict(),
            },
            "reference_audit": audit,
        }
        run.write_json(report, "metrics.json")
        run.notes["accuracy"] = {name: cm.accuracy for name, cm in results.items()}
    return report


def stage_analyze(cfg: dict, run: Run, dataset: Dataset, clusters: np.ndarray) -> dict:
    """Profiles, severity labels, day-wise and geographic densities, correlation."""
    with run.stage("analyze"):
        ac = cfg["analyze"]
        clusters = np.asarray(clusters, dtype=np.int64)
        everything = select_features(dataset, include_identifiers=True)
        corr = correlation_matrix(everything)
        run.record_output(write_correlation_csv(corr, everything.feature_names, run.path("correlation.csv")))

        profile = profile_clusters(dataset, clusters)
        run.write_json(profile.to_dict(), "profiles.json")
        run.write_csv(boxplot_frame(profile), "boxplot.csv")
        run.write_csv(profile.radar, "radar.csv", index=True)

        days = daywise_density(dataset, clusters, step=ac["day_step"])
        run.record_output(days.write_csv(run.path("daywise_density.csv")))
        labels = label_severity(profile, ac["severity"], days.intervals)
        run.write_json(
            {"labels": [l.to_dict() for l in labels], "mapping": ac["severity"],
             "day_bandwidths": days.bandwidths},
            "severity.json",
        )

        geo = geo_density(
            dataset, clusters, tuple(ac["geo_shape"]), tuple(ac["bbox"]),
            ac["geo_bandwidths"], tuple(ac["geo_fallback_bandwidths"]),
        )
        run.record_output(geo.write_csv(run.path("geo_density.csv")))
        run.write_csv(district_shares(dataset, clusters), "district_shares.csv")
        run.notes["severity"] = {str(l.cluster): l.extremity for l in labels}
    return {"profile": profile, "labels": labels, "days": days, "geo": geo}


def run_all(cfg: dict, run: Run) -> dict:
    inputs = stage_synth(cfg, run) if cfg["synth"]["enabled"] else None
    dataset = stage_ingest(cfg, run, inputs)
    clusters = stage_cluster(cfg, run, dataset)
    report = stage_classify(cfg, run, dataset, clusters)
    stage_analyze(cfg, run, dataset, clusters)
    return report
