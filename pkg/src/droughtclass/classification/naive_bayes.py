"""Gaussian naive Bayes evaluated entirely in log space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import InsufficientDataError
from .base import Classifier, check_training

VAR_SMOOTHING = 1e-9


def gaussian_log_density(x, mean, var):
    return -0.5 * np.log(2 * np.pi * var) - (x - mean) ** 2 / (2 * var)


def gaussian_density(x, mean, var):
    return np.exp(gaussian_log_density(x, mean, var))


@dataclass(frozen=True, eq=False)
class GaussianNB(Classifier):
    classes: np.ndarray  # class ids that have a fitted model
    priors: np.ndarray
    means: np.ndarray  # (n_classes, n_features)
    variances: np.ndarray  # population variances plus epsilon
    epsilon: float
    class_count: int
    seed: int = 0
    variant = "gaussian_nb"

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def joint_log_likelihood(self, values) -> np.ndarray:
        """log P(C_k) + sum_i log N(x_i | mu_ki, var_ki) for every row and fitted class."""
        values = self._check_queries(values)
        out = np.empty((len(values), len(self.classes)))
        for j in range(len(self.classes)):
            out[:, j] = np.log(self.priors[j]) + gaussian_log_density(
                values, self.means[j], self.variances[j]
            ).sum(axis=1)
        return out

    def predict_log_proba(self, values) -> np.ndarray:
        jll = self.joint_log_likelihood(values)
        return jll - logsumexp(jll, axis=1, keepdims=True)

    def predict(self, values) -> np.ndarray:
        # argmax takes the first maximum; classes are ascending
        return self.classes[self.joint_log_likelihood(values).argmax(axis=1)]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "classes": self.classes.tolist(),
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "epsilon": self.epsilon,
            "class_count": self.class_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianNB":
        return cls(
            np.asarray(data["classes"], dtype=np.int64),
            np.asarray(data["priors"], dtype=float),
            np.asarray(data["means"], dtype=float),
            np.asarray(data["variances"], dtype=float),
            float(data["epsilon"]),
            int(data["class_count"]),
        )


def gnb_fit(train, labels, class_count: int | None = None) -> GaussianNB:
    """Per-class frequency prior, feature means and population variances.

    Variances are smoothed by 1e-9 times the largest overall feature variance.
    """
    values, labels = check_training(train, labels)
    classes, counts = np.unique(labels, return_counts=True)
    for c, n in zip(classes, counts):
        if n < 2:
            raise InsufficientDataError(f"class {c} has {n} training row(s); at least 2 needed")
    epsilon = VAR_SMOOTHING * float(values.var(axis=0).max())
    means = np.array([values[labels == c].mean(axis=0) for c in classes])
    variances = np.array([values[labels == c].var(axis=0) for c in classes]) + epsilon
    if not (variances > 0).all():
        raise InsufficientDataError("every feature is constant; variances are zero")
    count = int(class_count if class_count is not None else classes.max() + 1)
    return GaussianNB(classes, counts / counts.sum(), means, variances, epsilon, count)


def gnb_predict(model: GaussianNB, query) -> int:
    return model.predict_one(query)
