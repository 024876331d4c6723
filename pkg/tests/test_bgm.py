from dataclasses import replace

import numpy as np
import pytest

from droughtclass.clustering import bgm_fit
from droughtclass.clustering.bgm import _statistics, _update_posterior, elbo
from droughtclass.errors import InputError


def _blobs(rng, centers, n=120, scale=0.3):
    return np.vstack([rng.normal(c, scale, size=(n, len(c))) for c in centers])


def test_single_blob_collapses_onto_one_component(rng):
    pts = rng.normal(size=(300, 2))
    m = bgm_fit(pts, k_max=5, seed=0)
    assert m.weights.max() >= 0.9


def test_elbo_non_decreasing(rng):
    pts = _blobs(rng, [(0, 0), (3, 1), (0, 4)])
    for seed in range(5):
        trace = np.array(bgm_fit(pts, k_max=6, seed=seed).elbo_trace)
        assert np.all(np.diff(trace) >= -1e-8 * np.abs(trace[1:]).max())


def test_normalization(rng):
    pts = _blobs(rng, [(0, 0), (4, 4)])
    m = bgm_fit(pts, k_max=4, seed=1)
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(m.responsibilities.sum(axis=1), 1.0, atol=1e-9)
    proba = m.predict_proba(pts[:10])
    assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-9)


def test_one_component_mean_is_data_mean(rng):
    pts = rng.normal(loc=[2.0, -1.0], size=(200, 2))
    m = bgm_fit(pts, k_max=1, alpha=1e6)
    # prior mean is the data mean as well, so the posterior mean equals it
    assert np.allclose(m.means[0], pts.mean(axis=0), atol=1e-9)
    assert m.weights[0] == 1.0


def test_covariances_are_symmetric_positive(rng):
    m = bgm_fit(_blobs(rng, [(0, 0, 0), (5, 5, 5)]), k_max=3, seed=0)
    for cov in m.covariances:
        assert np.allclose(cov, cov.T)
        assert np.linalg.eigvalsh(cov).min() > 0


def test_separated_blobs_found(rng):
    pts = _blobs(rng, [(0, 0), (6, 0), (0, 6)])
    m = bgm_fit(pts, k_max=8, seed=3)
    assert len(m.effective_components) == 3


def test_three_regimes_on_synthetic(synthetic_matrix):
    m = bgm_fit(synthetic_matrix, k_max=8, seed=42)
    assert len(m.effective_components) == 3
    assert m.converged


def test_stationary_at_convergence(rng):
    """Perturbing any posterior block of the converged state cannot raise the ELBO."""
    pts = _blobs(rng, [(0, 0), (4, 1)], n=80)
    m = bgm_fit(pts, k_max=3, seed=0, tol=1e-12, max_iter=5000)
    resp = m.responsibilities
    stats = _statistics(pts, resp, m.prior.m0)
    q = _update_posterior(stats, m.prior)
    base = elbo(resp, stats, q, m.prior)
    for field, delta in (("m", 1e-3), ("beta", 1e-2), ("nu", 1e-2), ("alpha", 1e-2)):
        for sign in (1, -1):
            moved = replace(q, **{field: getattr(q, field) + sign * delta})
            assert elbo(resp, stats, moved, m.prior) <= base + 1e-9


def test_deterministic(rng):
    pts = _blobs(rng, [(0, 0), (3, 3)])
    a = bgm_fit(pts, k_max=4, seed=7)
    b = bgm_fit(pts, k_max=4, seed=7)
    assert a.elbo_trace == b.elbo_trace
    assert np.array_equal(a.weights, b.weights)


def test_invalid_arguments():
    with pytest.raises(InputError):
        bgm_fit(np.zeros((3, 2)), k_max=5)
    with pytest.raises(InputError):
        bgm_fit(np.zeros((5, 2)), k_max=2, alpha=0)
