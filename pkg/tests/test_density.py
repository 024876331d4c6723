import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from droughtclass.density import (
    DEFAULT_SEVERITY,
    boxplot_frame,
    daywise_density,
    district_shares,
    dominant_intervals,
    geo_density,
    kde_1d,
    kde_2d,
    label_severity,
    profile_clusters,
    scott_bandwidth,
)
from droughtclass.errors import ConfigError, DegenerateSpreadError, InputError
from droughtclass.ingest import CANONICAL_COLUMNS, Dataset


def _dataset(gwettop, doy=None):
    n = len(gwettop)
    frame = pd.DataFrame({c: 1.0 for c in CANONICAL_COLUMNS}, index=range(n))
    frame["DISTRICT"] = "d"
    frame["YEAR"] = 2013
    frame["DOY"] = np.arange(1, n + 1) if doy is None else doy
    frame["GWETTOP"] = gwettop
    frame["RH2M"] = np.linspace(40, 90, n)
    return Dataset(frame)


def test_profile_median_example():
    prof = profile_clusters(_dataset([0.8, 0.85, 0.9, 0.5]), [0, 0, 0, 1])
    assert prof.median(0, "GWETTOP") == pytest.approx(0.85)
    assert prof.counts == {0: 3, 1: 1}


def test_single_member_cluster_collapses():
    prof = profile_clusters(_dataset([0.8, 0.85, 0.9, 0.5]), [0, 0, 0, 1])
    row = prof.stats[(prof.stats.cluster == 1) & (prof.stats.parameter == "GWETTOP")].iloc[0]
    assert row["min"] == row["q1"] == row["median"] == row["q3"] == row["max"] == 0.5


def test_profile_medians_match_oracle(rng):
    wet = rng.random(101)
    labels = rng.integers(0, 3, 101)
    labels[:3] = [0, 1, 2]
    prof = profile_clusters(_dataset(wet), labels)
    for c in range(3):
        want = oracles.median(wet[labels == c].tolist())
        assert oracles.rel_close(prof.median(c, "GWETTOP"), want)
    stats = boxplot_frame(prof)
    assert (stats["min"] <= stats["q1"]).all() and (stats["q1"] <= stats["median"]).all()
    assert (stats["median"] <= stats["q3"]).all() and (stats["q3"] <= stats["max"]).all()
    assert sum(prof.counts.values()) == 101


def test_profile_invariant_to_row_order(rng):
    wet = rng.random(50)
    labels = np.arange(50) % 3
    perm = rng.permutation(50)
    a = profile_clusters(_dataset(wet), labels)
    b = profile_clusters(_dataset(wet[perm]), labels[perm])
    for c in range(3):
        assert a.median(c, "GWETTOP") == b.median(c, "GWETTOP")


def test_profile_rejects_gap_in_ids():
    with pytest.raises(InputError):
        profile_clusters(_dataset([0.1, 0.2]), [0, 2])


def test_default_severity_labels(synthetic):
    prof = profile_clusters(_dataset([0.8, 0.6, 0.4]), [0, 1, 2])
    labels = label_severity(prof)
    assert [lab.extremity for lab in labels] == ["Lower", "Higher", "Moderate"]
    assert labels == label_severity(prof)


def test_permuted_mapping_permutes_labels():
    prof = profile_clusters(_dataset([0.8, 0.6, 0.4]), [0, 1, 2])
    perm = {0: DEFAULT_SEVERITY[2], 1: DEFAULT_SEVERITY[0], 2: DEFAULT_SEVERITY[1]}
    assert [lab.extremity for lab in label_severity(prof, perm)] == ["Moderate", "Lower", "Higher"]


def test_unmapped_cluster():
    prof = profile_clusters(_dataset([0.8, 0.6, 0.4]), [0, 1, 2])
    with pytest.raises(ConfigError):
        label_severity(prof, {0: "Lower", 1: "Higher"})


def test_kde_1d_single_sample_peak():
    g = kde_1d([0.0], [0.0], bandwidth=1.0)
    assert g.densities[0][0] == pytest.approx(0.39894, abs=1e-5)


def test_kde_1d_symmetric():
    grid = np.linspace(-5, 5, 101)
    d = kde_1d([-1.0, 0.0, 1.0], grid).densities[0]
    assert np.allclose(d, d[::-1], atol=1e-15)


def test_kde_1d_integrates_to_one(rng):
    samples = rng.normal(3.0, 2.0, 500)
    h = scott_bandwidth(samples)[0]
    grid = np.linspace(samples.min() - 10 * h, samples.max() + 10 * h, 4001)
    d = kde_1d(samples, grid).densities[0]
    assert abs(np.trapezoid(d, grid) - 1.0) < 1e-3


def test_scott_bandwidth_rule(rng):
    x = rng.normal(size=200)
    assert scott_bandwidth(x)[0] == pytest.approx(np.std(x, ddof=1) * 200 ** (-0.2))
    with pytest.raises(DegenerateSpreadError):
        scott_bandwidth(np.ones(10))
    with pytest.raises(DegenerateSpreadError):
        kde_1d(np.ones(10), [1.0])
    assert kde_1d(np.ones(10), [1.0], bandwidth=0.5).densities[0][0] > 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=40).filter(lambda v: np.std(v) > 1e-3))
def test_kde_1d_bounded_by_peak(samples):
    grid = np.linspace(-120, 120, 301)
    g = kde_1d(samples, grid)
    h = g.bandwidths[0][0]
    d = g.densities[0]
    assert (d >= 0).all() and d.max() <= 1 / (h * np.sqrt(2 * np.pi)) * (1 + 1e-12)


def test_kde_2d_single_point_peak_and_symmetry():
    lat = np.linspace(-2, 2, 41)
    lon = np.linspace(-2, 2, 41)
    d = kde_2d(np.zeros((3, 2)), lat, lon, bandwidths=(0.5, 0.5)).densities[0]
    assert np.unravel_index(d.argmax(), d.shape) == (20, 20)
    assert np.allclose(d, d.T) and np.allclose(d, d[::-1, ::-1])
    with pytest.raises(DegenerateSpreadError):
        kde_2d(np.zeros((3, 2)), lat, lon)


def test_kde_2d_duplicated_samples_unchanged(rng):
    pts = rng.normal(size=(30, 2))
    grid = np.linspace(-3, 3, 25)
    a = kde_2d(pts, grid, grid, bandwidths=(0.4, 0.6)).densities[0]
    b = kde_2d(np.vstack([pts, pts]), grid, grid, bandwidths=(0.4, 0.6)).densities[0]
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_kde_2d_integrates_to_one(rng):
    pts = np.column_stack([rng.normal(23.5, 0.8, 300), rng.normal(90.3, 0.6, 300)])
    lat = np.linspace(17, 30, 261)
    lon = np.linspace(85, 96, 221)
    d = kde_2d(pts, lat, lon).densities[0]
    total = np.trapezoid(np.trapezoid(d, lon, axis=1), lat)
    assert abs(total - 1.0) < 1e-2


def test_dominant_intervals_disjoint():
    grid = np.arange(1, 11, dtype=float)
    dens = {0: np.array([5, 5, 1, 1, 1, 2, 2, 0, 0, 3.0]), 1: np.array([1, 1, 4, 4, 1, 2, 3, 0, 0, 1.0]),
            2: np.array([0, 0, 0, 0, 6, 0, 0, 0, 0, 0.0])}
    spans = dominant_intervals(grid, dens)
    assert spans == {0: [(1.0, 2.0), (10.0, 10.0)], 1: [(3.0, 4.0), (7.0, 7.0)], 2: [(5.0, 5.0)]}
    # days 6, 8 and 9 are ties: no cluster owns them


def test_daywise_monsoon_and_winter(synthetic, regime_canonical):
    g = daywise_density(synthetic.dataset, regime_canonical)
    monsoon = g.intervals[0]
    assert any(a <= 250 and b >= 150 for a, b in monsoon)
    assert all(140 <= a and b <= 260 for a, b in monsoon)
    winter = g.intervals[1]
    assert winter[0][0] == 1 and winter[-1][1] == 366
    # intervals of distinct clusters never overlap
    days = [set(range(a, b + 1)) for spans in g.intervals.values() for a, b in spans]
    assert sum(len(s) for s in days) == len(set().union(*days))


def test_uniform_doy_is_flat(synthetic):
    labels = np.zeros(len(synthetic.dataset), dtype=int)
    g = daywise_density(synthetic.dataset, labels)
    h = g.bandwidths[0][0]
    grid = g.axes[0]
    interior = (grid >= 1 + 3 * h) & (grid <= 366 - 3 * h)
    d = g.densities[0][interior]
    assert d.max() / d.min() < 1.5


def test_geo_density_and_shares(synthetic, regime_canonical):
    g = geo_density(synthetic.dataset, regime_canonical)
    assert set(g.densities) == {0, 1, 2}
    assert g.densities[0].shape == (63, 48)
    frame = g.to_frame()
    assert len(frame) == 63 * 48
    shares = district_shares(synthetic.dataset, regime_canonical)
    assert np.allclose(shares.groupby("DISTRICT")["share"].sum(), 1.0)


def test_geo_density_single_site_fallback():
    ds = _dataset([0.5, 0.6, 0.7])
    g = geo_density(ds, [0, 0, 0], shape=(5, 5))
    assert g.bandwidths[0] == (0.25, 0.25)
