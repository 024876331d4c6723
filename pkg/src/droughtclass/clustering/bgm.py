"""Variational Bayesian Gaussian mixture with a symmetric Dirichlet weight prior.

Mean-field approximation q(Z) q(pi) prod_k q(mu_k, Lambda_k) with a
Normal-Wishart prior on each component and Dir(alpha/K, ..., alpha/K) on the
mixing weights.  Coordinate ascent alternates the responsibility update and
the conjugate parameter updates, so the evidence lower bound never decreases.

Regularization enters through the prior: ``reg_covar`` is added to the
diagonal of the prior scale matrix, which every posterior scale matrix
contains.  The updates stay exact, so the ELBO guarantee is kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import digamma, gammaln, logsumexp

from ..errors import DimensionError, InputError, NumericalError
from .kmeans import kmeans_fit

_LOG_2PI = np.log(2 * np.pi)


@dataclass(frozen=True)
class Prior:
    alpha0: float
    beta0: float
    m0: np.ndarray
    nu0: float
    w0_inv: np.ndarray


@dataclass(frozen=True)
class Posterior:
    """Variational parameters of q(pi) and q(mu_k, Lambda_k)."""

    alpha: np.ndarray
    beta: np.ndarray
    m: np.ndarray
    nu: np.ndarray
    w_inv: np.ndarray
    chol: np.ndarray  # lower Cholesky factor of each w_inv

    @property
    def log_det_w(self) -> np.ndarray:
        return -2.0 * np.log(np.diagonal(self.chol, axis1=1, axis2=2)).sum(axis=1)

    def expected_log_det_precision(self) -> np.ndarray:
        d = self.m.shape[1]
        i = np.arange(1, d + 1)
        return digamma((self.nu[:, None] + 1 - i) / 2).sum(axis=1) + d * np.log(2) + self.log_det_w

    def expected_log_weights(self) -> np.ndarray:
        return digamma(self.alpha) - digamma(self.alpha.sum())


@dataclass(frozen=True)
class BgmModel:
    k_max: int
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    alpha: float
    elbo_trace: tuple[float, ...]
    responsibilities: np.ndarray
    posterior: Posterior
    prior: Prior
    seed: int
    reg_covar: float
    weight_floor: float
    converged: bool
    merges: int = 0

    @property
    def assignments(self) -> np.ndarray:
        return self.responsibilities.argmax(axis=1)

    @property
    def effective_components(self) -> np.ndarray:
        return np.flatnonzero(self.weights > self.weight_floor)

    def predict_proba(self, values) -> np.ndarray:
        values = np.asarray(getattr(values, "values", values), dtype=float)
        if values.ndim != 2 or values.shape[1] != self.means.shape[1]:
            raise DimensionError(f"expected {self.means.shape[1]} features")
        return np.exp(_log_resp(values, self.posterior))

    def predict(self, values) -> np.ndarray:
        return self.predict_proba(values).argmax(axis=1)

    def to_dict(self) -> dict:
        q = self.posterior
        return {
            "k_max": self.k_max,
            "alpha": self.alpha,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
            "elbo_trace": list(self.elbo_trace),
            "effective_components": self.effective_components.tolist(),
            "reg_covar": self.reg_covar,
            "weight_floor": self.weight_floor,
            "seed": self.seed,
            "converged": self.converged,
            "merges": self.merges,
            "variational_state": {
                "alpha": q.alpha.tolist(),
                "beta": q.beta.tolist(),
                "m": q.m.tolist(),
                "nu": q.nu.tolist(),
                "w_inv": q.w_inv.tolist(),
            },
        }


def make_prior(values: np.ndarray, k_max: int, alpha: float, reg_covar: float) -> Prior:
    d = values.shape[1]
    cov = np.atleast_2d(np.cov(values, rowvar=False, bias=True)) if len(values) > 1 else np.zeros((d, d))
    return Prior(
        alpha0=alpha / k_max,
        beta0=1.0,
        m0=values.mean(axis=0),
        nu0=float(d),
        w0_inv=cov + reg_covar * np.eye(d),
    )


@dataclass(frozen=True)
class _Stats:
    nk: np.ndarray
    xbar: np.ndarray
    scatter: np.ndarray  # sum_n r_nk (x_n - xbar_k)(x_n - xbar_k)^T


def _statistics(values: np.ndarray, resp: np.ndarray, m0: np.ndarray) -> _Stats:
    nk = resp.sum(axis=0)
    k, d = resp.shape[1], values.shape[1]
    safe = np.where(nk > 0, nk, 1.0)
    xbar = np.where((nk > 0)[:, None], (resp.T @ values) / safe[:, None], m0)
    scatter = np.empty((k, d, d))
    for j in range(k):
        diff = values - xbar[j]
        scatter[j] = (diff * resp[:, j:j + 1]).T @ diff
        scatter[j] = (scatter[j] + scatter[j].T) / 2
    return _Stats(nk, xbar, scatter)


def _update_posterior(stats: _Stats, prior: Prior) -> Posterior:
    nk = stats.nk
    alpha = prior.alpha0 + nk
    beta = prior.beta0 + nk
    m = (prior.beta0 * prior.m0 + nk[:, None] * stats.xbar) / beta[:, None]
    nu = prior.nu0 + nk
    dev = stats.xbar - prior.m0
    shrink = prior.beta0 * nk / (prior.beta0 + nk)
    w_inv = prior.w0_inv + stats.scatter + shrink[:, None, None] * np.einsum("ki,kj->kij", dev, dev)
    w_inv = (w_inv + np.transpose(w_inv, (0, 2, 1))) / 2
    try:
        chol = np.linalg.cholesky(w_inv)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"posterior scale matrix not positive definite: {exc}") from None
    return Posterior(alpha, beta, m, nu, w_inv, chol)


def _quad(chol: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Rows of ``vecs`` in the metric W = (L L^T)^-1."""
    sol = solve_triangular(chol, vecs.T, lower=True)
    return (sol**2).sum(axis=0)


def _log_rho(values: np.ndarray, q: Posterior) -> np.ndarray:
    n, d = values.shape
    k = len(q.alpha)
    out = np.empty((n, k))
    log_lambda = q.expected_log_det_precision()
    log_pi = q.expected_log_weights()
    for j in range(k):
        maha = q.nu[j] * _quad(q.chol[j], values - q.m[j])
        out[:, j] = log_pi[j] + 0.5 * log_lambda[j] - d / (2 * q.beta[j]) - 0.5 * maha - 0.5 * d * _LOG_2PI
    return out


def _log_resp(values: np.ndarray, q: Posterior) -> np.ndarray:
    log_rho = _log_rho(values, q)
    return log_rho - logsumexp(log_rho, axis=1, keepdims=True)


def _log_wishart_norm(log_det_w, nu, d):
    i = np.arange(1, d + 1)
    return (
        -0.5 * nu * log_det_w
        - 0.5 * nu * d * np.log(2)
        - 0.25 * d * (d - 1) * np.log(np.pi)
        - gammaln((np.atleast_1d(nu)[:, None] + 1 - i) / 2).sum(axis=1)
    )


def _log_dirichlet_norm(alpha: np.ndarray) -> float:
    return float(gammaln(alpha.sum()) - gammaln(alpha).sum())


def elbo(resp: np.ndarray, stats: _Stats, q: Posterior, prior: Prior) -> float:
    """Evidence lower bound of the current (q(Z), q(theta)) pair."""
    k, d = q.m.shape
    nk = stats.nk
    log_lambda = q.expected_log_det_precision()
    log_pi = q.expected_log_weights()
    w = np.linalg.inv(q.w_inv)
    w = (w + np.transpose(w, (0, 2, 1))) / 2

    tr_sw = np.einsum("kij,kji->k", stats.scatter, w)
    dx = stats.xbar - q.m
    dm = q.m - prior.m0
    quad_x = np.einsum("ki,kij,kj->k", dx, w, dx)
    quad_m = np.einsum("ki,kij,kj->k", dm, w, dm)
    tr_w0w = np.einsum("ij,kji->k", prior.w0_inv, w)

    e_log_px = 0.5 * np.sum(
        nk * (log_lambda - d / q.beta - d * _LOG_2PI) - q.nu * tr_sw - q.nu * nk * quad_x
    )
    e_log_pz = float(np.sum(nk * log_pi))
    alpha0 = np.full(k, prior.alpha0)
    e_log_ppi = _log_dirichlet_norm(alpha0) + (prior.alpha0 - 1) * log_pi.sum()

    log_det_w0 = -np.linalg.slogdet(prior.w0_inv)[1]
    log_b0 = _log_wishart_norm(np.array([log_det_w0]), np.array([prior.nu0]), d)[0]
    e_log_pmu = 0.5 * np.sum(
        d * np.log(prior.beta0 / (2 * np.pi)) + log_lambda - d * prior.beta0 / q.beta - prior.beta0 * q.nu * quad_m
    )
    e_log_pmu += k * log_b0 + 0.5 * (prior.nu0 - d - 1) * log_lambda.sum() - 0.5 * np.sum(q.nu * tr_w0w)

    nz = resp > 0
    e_log_qz = float(np.sum(resp[nz] * np.log(resp[nz])))
    e_log_qpi = float(np.sum((q.alpha - 1) * log_pi)) + _log_dirichlet_norm(q.alpha)
    log_b = _log_wishart_norm(q.log_det_w, q.nu, d)
    entropy_lambda = -log_b - 0.5 * (q.nu - d - 1) * log_lambda + 0.5 * q.nu * d
    e_log_qmu = np.sum(0.5 * log_lambda + 0.5 * d * np.log(q.beta / (2 * np.pi)) - 0.5 * d - entropy_lambda)

    return float(e_log_px + e_log_pz + e_log_ppi + e_log_pmu - e_log_qz - e_log_qpi - e_log_qmu)


def _ascend(values, resp, prior, max_iter, tol):
    """Coordinate ascent from ``resp``; returns (resp, q, trace, converged)."""
    n = len(values)
    trace = []
    converged = False
    for _ in range(max_iter):
        stats = _statistics(values, resp, prior.m0)
        q = _update_posterior(stats, prior)
        trace.append(elbo(resp, stats, q, prior))
        if len(trace) > 1 and (trace[-1] - trace[-2]) / n < tol:
            converged = True
            break
        resp = np.exp(_log_resp(values, q))
    return resp, q, trace, converged


def _merge_pass(values, resp, current, prior, max_iter, tol, min_mass):
    """Try merging each occupied pair (lowest indices first); first ELBO gain wins."""
    n = len(values)
    occupied = np.flatnonzero(resp.sum(axis=0) >= min_mass)
    for a_pos, a in enumerate(occupied):
        for b in occupied[a_pos + 1:]:
            trial = resp.copy()
            trial[:, a] += trial[:, b]
            trial[:, b] = 0.0
            out = _ascend(values, trial, prior, max_iter, tol)
            if (out[2][-1] - current) / n > tol:
                return out
    return None


def bgm_fit(
    matrix,
    k_max: int = 8,
    alpha: float = 1.0,
    seed: int = 0,
    max_iter: int = 1000,
    tol: float = 1e-6,
    reg_covar: float = 1e-6,
    weight_floor: float = 0.02,
    merge: bool = True,
) -> BgmModel:
    """Fit by coordinate ascent on the ELBO.

    Responsibilities start from a single seeded K-means run with ``k_max``
    clusters.  Iteration stops when the per-row ELBO gain drops below
    ``tol`` or after ``max_iter`` sweeps.

    K-means starts split a single cloud into several pieces, a local optimum
    plain coordinate ascent cannot leave.  With ``merge`` on, each pair of
    occupied components is then tried merged and re-converged, and a merge
    is kept only when it raises the ELBO.  The trace records the ascent plus
    one entry per accepted merge, so it stays non-decreasing.
    """
    values = np.asarray(getattr(matrix, "values", matrix), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n, d = values.shape
    if not np.isfinite(values).all():
        raise InputError("matrix contains non-finite values")
    if not 1 <= k_max <= n:
        raise InputError(f"k_max must lie in [1, {n}], got {k_max}")
    if alpha <= 0:
        raise InputError(f"alpha must be positive, got {alpha}")

    prior = make_prior(values, k_max, alpha, reg_covar)
    init = kmeans_fit(values, k_max, seed=seed, n_init=1)
    resp = np.zeros((n, k_max))
    resp[np.arange(n), init.assignments] = 1.0

    resp, q, trace, converged = _ascend(values, resp, prior, max_iter, tol)
    merges = 0
    while merge:
        # a component needs a couple of rows' worth of mass to be worth merging
        better = _merge_pass(values, resp, trace[-1], prior, max_iter, tol, min_mass=2.0)
        if better is None:
            break
        resp, q, sub_trace, converged = better
        trace.append(sub_trace[-1])
        merges += 1
    resp = np.exp(_log_resp(values, q))

    weights = q.alpha / q.alpha.sum()
    cov = q.w_inv / q.nu[:, None, None]
    cov = (cov + np.transpose(cov, (0, 2, 1))) / 2
    return BgmModel(
        k_max=k_max,
        weights=weights,
        means=q.m.copy(),
        covariances=cov,
        alpha=alpha,
        elbo_trace=tuple(trace),
        responsibilities=resp,
        posterior=q,
        prior=prior,
        seed=seed,
        reg_covar=reg_covar,
        weight_floor=weight_floor,
        converged=converged,
        merges=merges,
    )
