"""Cluster profiles, severity labels and Gaussian kernel density estimates."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ConfigError, DegenerateSpreadError, DimensionError, InputError
from .ingest import BOUNDING_BOX, DISTRICT, WEATHER_PARAMETERS, Dataset

EXTREMITIES = ("Lower", "Moderate", "Higher")

# canonical cluster id -> (extremity, season), as in the reference cluster summary
DEFAULT_SEVERITY = {
    0: {"extremity": "Lower", "season": "Monsoon"},
    1: {"extremity": "Higher", "season": "Winter"},
    2: {"extremity": "Moderate", "season": "Transitional/Dry Season"},
}

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class ClusterProfile:
    """Order statistics of raw parameters and radar axes per canonical cluster.

    ``stats`` has one row per (cluster, parameter) with min, q1, median, q3,
    max and mean; ``radar`` is clusters x parameters of standardized means.
    """

    clusters: tuple[int, ...]
    counts: dict[int, int]
    stats: pd.DataFrame
    radar: pd.DataFrame

    def median(self, cluster: int, parameter: str) -> float:
        row = self.stats[(self.stats["cluster"] == cluster) & (self.stats["parameter"] == parameter)]
        return float(row["median"].iloc[0])

    def to_dict(self) -> dict:
        out = {}
        for c in self.clusters:
            sub = self.stats[self.stats["cluster"] == c].set_index("parameter")
            out[str(c)] = {
                "count": self.counts[c],
                "parameters": {
                    p: {k: float(sub.at[p, k]) for k in ("min", "q1", "median", "q3", "max", "mean")}
                    for p in sub.index
                },
                "radar": {p: float(self.radar.at[c, p]) for p in self.radar.columns},
            }
        return out


def profile_clusters(dataset: Dataset, assignments, parameters=WEATHER_PARAMETERS) -> ClusterProfile:
    assignments = np.asarray(assignments)
    if len(assignments) != len(dataset):
        raise DimensionError("assignments and dataset rows are not aligned")
    raw = dataset.frame[list(parameters)].to_numpy(dtype=float)
    mean, std = raw.mean(axis=0), raw.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    scaled = (raw - mean) / std
    clusters = tuple(int(c) for c in np.unique(assignments))
    if clusters != tuple(range(len(clusters))):
        raise InputError(f"cluster ids must be 0..k-1 with no empty cluster, got {list(clusters)}")
    rows, radar, counts = [], [], {}
    for c in clusters:
        member = assignments == c
        counts[c] = int(member.sum())
        q = np.quantile(raw[member], [0.0, 0.25, 0.5, 0.75, 1.0], axis=0)
        means = raw[member].mean(axis=0)
        for j, p in enumerate(parameters):
            rows.append({
                "cluster": c, "parameter": p,
                "min": q[0, j], "q1": q[1, j], "median": q[2, j], "q3": q[3, j], "max": q[4, j],
                "mean": means[j],
            })
        radar.append(scaled[member].mean(axis=0))
    stats = pd.DataFrame(rows)
    radar_frame = pd.DataFrame(radar, index=list(clusters), columns=list(parameters))
    radar_frame.index.name = "cluster"
    return ClusterProfile(clusters, counts, stats, radar_frame)


@dataclass(frozen=True)
class SeverityLabel:
    cluster: int
    extremity: str
    season: str
    day_ranges: tuple[tuple[int, int], ...] = ()

    def to_dict(self) -> dict:
        return {
            "cluster": self.cluster,
            "extremity": self.extremity,
            "season": self.season,
            "day_ranges": [list(r) for r in self.day_ranges],
        }


def normalize_mapping(mapping) -> dict[int, dict]:
    out = {}
    for key, entry in (mapping or DEFAULT_SEVERITY).items():
        if isinstance(entry, str):
            entry = {"extremity": entry, "season": ""}
        if entry.get("extremity") not in EXTREMITIES:
            raise ConfigError(f"severity mapping for cluster {key}: extremity must be one of {EXTREMITIES}")
        out[int(key)] = {"extremity": entry["extremity"], "season": str(entry.get("season", ""))}
    return out


def label_severity(profile: ClusterProfile, mapping=None, day_ranges=None) -> list[SeverityLabel]:
    """Attach the configured extremity/season to each canonical cluster.

    ``day_ranges`` (cluster -> list of (start, end) day spans) usually comes
    from :func:`daywise_density`.
    """
    table = normalize_mapping(mapping)
    labels = []
    for c in profile.clusters:
        if c not in table:
            raise ConfigError(f"severity mapping has no entry for cluster {c}")
        spans = tuple(tuple(int(v) for v in r) for r in (day_ranges or {}).get(c, ()))
        labels.append(SeverityLabel(c, table[c]["extremity"], table[c]["season"], spans))
    return labels


@dataclass(frozen=True)
class DensityGrid:
    kind: str  # "doy" / "1d" or "latlon"
    axes: tuple[np.ndarray, ...]
    densities: dict
    bandwidths: dict
    intervals: dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        """One row per grid point, one column per cluster."""
        if len(self.axes) == 1:
            frame = pd.DataFrame({"DOY" if self.kind == "doy" else "x": self.axes[0]})
            for key, dens in self.densities.items():
                frame[f"cluster_{key}"] = dens
            return frame
        lat, lon = np.meshgrid(self.axes[0], self.axes[1], indexing="ij")
        frame = pd.DataFrame({"LAT": lat.ravel(), "LON": lon.ravel()})
        for key, dens in self.densities.items():
            frame[f"cluster_{key}"] = dens.ravel()
        return frame

    def write_csv(self, path: str | Path) -> Path:
        self.to_frame().to_csv(path, index=False, lineterminator="\n")
        return Path(path)


def scott_bandwidth(samples: np.ndarray) -> np.ndarray:
    """Per-dimension Scott bandwidth sigma * n^(-1/(d+4)) with the sample std."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    n, d = samples.shape
    if n < 2:
        raise DegenerateSpreadError("bandwidth selection needs at least 2 samples")
    sigma = samples.std(axis=0, ddof=1)
    if not (sigma > 0).all():
        raise DegenerateSpreadError("samples have zero spread; pass an explicit bandwidth")
    return sigma * n ** (-1.0 / (d + 4))


def _kernel_sum_1d(samples: np.ndarray, grid: np.ndarray, h: float) -> np.ndarray:
    pts, weights = np.unique(samples, return_counts=True)
    z = (grid[:, None] - pts[None, :]) / h
    return (np.exp(-0.5 * z**2) * weights).sum(axis=1) * _INV_SQRT_2PI / (h * len(samples))


def kde_1d(samples, grid, bandwidth: float | None = None, label=0) -> DensityGrid:
    """Mean of Gaussian kernels at every grid point (Scott bandwidth by default)."""
    samples = np.asarray(samples, dtype=float).ravel()
    grid = np.asarray(grid, dtype=float).ravel()
    if len(samples) == 0:
        raise InputError("no samples")
    if bandwidth is None:
        h = float(scott_bandwidth(samples)[0])
    else:
        h = float(bandwidth)
        if h <= 0:
            raise InputError("bandwidth must be positive")
    return DensityGrid("1d", (grid,), {label: _kernel_sum_1d(samples, grid, h)}, {label: (h,)})


def kde_2d(samples, lat_grid, lon_grid, bandwidths=None, label=0) -> DensityGrid:
    """Product-Gaussian KDE of (lat, lon) samples on the lattice lat_grid x lon_grid."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise DimensionError("samples must be (n, 2) latitude/longitude pairs")
    if len(samples) == 0:
        raise InputError("no samples")
    h = scott_bandwidth(samples) if bandwidths is None else np.asarray(bandwidths, dtype=float)
    if h.shape != (2,) or not (h > 0).all():
        raise InputError("bandwidths must be two positive numbers")
    lat_grid = np.asarray(lat_grid, dtype=float)
    lon_grid = np.asarray(lon_grid, dtype=float)
    pts, weights = np.unique(samples, axis=0, return_counts=True)
    klat = np.exp(-0.5 * ((lat_grid[:, None] - pts[None, :, 0]) / h[0]) ** 2)
    klon = np.exp(-0.5 * ((lon_grid[:, None] - pts[None, :, 1]) / h[1]) ** 2)
    dens = (klat * weights) @ klon.T
    dens *= _INV_SQRT_2PI**2 / (h[0] * h[1] * len(samples))
    return DensityGrid("latlon", (lat_grid, lon_grid), {label: dens}, {label: tuple(h.tolist())})


def dominant_intervals(grid: np.ndarray, densities: dict) -> dict:
    """Maximal runs of grid points where one cluster's density beats every other's strictly."""
    keys = list(densities)
    stack = np.vstack([densities[k] for k in keys])
    out = {k: [] for k in keys}
    if len(keys) == 1:
        out[keys[0]].append((grid[0], grid[-1]))
        return out
    top = stack.argmax(axis=0)
    best = stack[top, np.arange(stack.shape[1])]
    runner = np.sort(stack, axis=0)[-2]
    winner = np.where(best > runner, top, -1)
    start = 0
    for i in range(1, len(grid) + 1):
        if i == len(grid) or winner[i] != winner[start]:
            if winner[start] >= 0:
                out[keys[winner[start]]].append((grid[start], grid[i - 1]))
            start = i
    return out


def daywise_density(dataset: Dataset, assignments, step: int = 1, bandwidth: float | None = None) -> DensityGrid:
    """Per-cluster DOY density on 1..366 plus each cluster's dominant day spans.

    Day-of-year is treated as a plain line (no wrap-around at the year end).
    """
    assignments = np.asarray(assignments)
    if len(assignments) != len(dataset):
        raise DimensionError("assignments and dataset rows are not aligned")
    grid = np.arange(1, 367, step, dtype=float)
    doy = dataset.column("DOY")
    dens, bw = {}, {}
    for c in np.unique(assignments):
        g = kde_1d(doy[assignments == c], grid, bandwidth, label=int(c))
        dens.update(g.densities)
        bw.update(g.bandwidths)
    spans = dominant_intervals(grid, dens)
    spans = {k: [(int(a), int(b)) for a, b in v] for k, v in spans.items()}
    return DensityGrid("doy", (grid,), dens, bw, spans)


def geo_density(
    dataset: Dataset,
    assignments,
    shape: tuple[int, int] = (63, 48),
    bbox: tuple[float, float, float, float] = BOUNDING_BOX,
    bandwidths=None,
    fallback_bandwidths=(0.25, 0.25),
) -> DensityGrid:
    """Per-cluster (lat, lon) density over a lattice covering ``bbox``.

    Each cluster is normalized on its own.  A cluster whose members sit at a
    single location has no Scott bandwidth; ``fallback_bandwidths`` is used.
    """
    assignments = np.asarray(assignments)
    lat_grid = np.linspace(bbox[0], bbox[1], shape[0])
    lon_grid = np.linspace(bbox[2], bbox[3], shape[1])
    coords = dataset.frame[["LAT", "LON"]].to_numpy(dtype=float)
    dens, bw = {}, {}
    for c in np.unique(assignments):
        pts = coords[assignments == c]
        try:
            g = kde_2d(pts, lat_grid, lon_grid, bandwidths, label=int(c))
        except DegenerateSpreadError:
            g = kde_2d(pts, lat_grid, lon_grid, fallback_bandwidths, label=int(c))
        dens.update(g.densities)
        bw.update(g.bandwidths)
    return DensityGrid("latlon", (lat_grid, lon_grid), dens, bw)


def district_shares(dataset: Dataset, assignments) -> pd.DataFrame:
    """Rows per (district, cluster) and their share of the district's days."""
    frame = dataset.frame[[DISTRICT, "LAT", "LON"]].copy()
    frame["cluster"] = np.asarray(assignments)
    counts = frame.groupby([DISTRICT, "LAT", "LON", "cluster"]).size().unstack("cluster", fill_value=0)
    shares = counts.div(counts.sum(axis=1), axis=0)
    out = counts.stack().rename("count").to_frame()
    out["share"] = shares.stack()
    return out.reset_index().sort_values(["LAT", "LON", DISTRICT, "cluster"], kind="mergesort")


def boxplot_frame(profile: ClusterProfile) -> pd.DataFrame:
    return profile.stats[["cluster", "parameter", "min", "q1", "median", "q3", "max"]]
