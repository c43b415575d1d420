"""Smooth convex losses: value, gradient and gradient-Lipschitz constants.

Squared-error and logistic losses over a fixed dataset.  When the number of
features is moderate the Gram matrix X^T X (and X^T y) is precomputed so the
per-iteration cost of a solver is independent of the sample size; otherwise
gradients stream through X.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: Precompute X^T X automatically up to this many features.
PRECOMPUTE_MAX_FEATURES = 4096


class LossEvaluation(NamedTuple):
    value: float
    gradient: np.ndarray


@dataclass(frozen=True)
class Dataset:
    """Design matrix and response. Logistic labels must be in {-1, +1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        if y.shape != (X.shape[0],):
            raise ValueError(
                f"y has shape {y.shape}, expected ({X.shape[0]},)"
            )
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("non-finite entries in dataset")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def num_samples(self):
        return self.X.shape[0]

    @property
    def num_features(self):
        return self.X.shape[1]


def gram_lipschitz(X, tol=1e-6, max_iter=1000) -> float:
    """Largest eigenvalue of X^T X via power iteration.

    Falls back to the (always valid) squared Frobenius norm upper bound if
    the iteration has not converged, with a warning.
    """
    X = np.asarray(X, dtype=float)
    J = X.shape[1]
    v = np.ones(J) / np.sqrt(J)
    last = np.inf
    for _ in range(max_iter):
        w = X.T @ (X @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - last) <= tol * max(1.0, norm):
            return float(norm)
        last = norm
    frob = float(np.sum(X * X))
    warnings.warn(
        "power iteration for the gradient Lipschitz constant did not "
        "converge; using the Frobenius upper bound",
        RuntimeWarning,
    )
    return frob


class SquaredLoss:
    """g(beta) = 0.5 * ||y - X beta||^2 with gradient X^T (X beta - y)."""

    def __init__(self, data: Dataset, precompute=None):
        self.data = data
        if precompute is None:
            precompute = data.num_features <= PRECOMPUTE_MAX_FEATURES
        self.precompute = bool(precompute)
        if self.precompute:
            self._XtX = data.X.T @ data.X
            self._Xty = data.X.T @ data.y
            self._yty = float(data.y @ data.y)
        self._lipschitz = None

    @property
    def num_features(self):
        return self.data.num_features

    def value(self, beta) -> float:
        beta = np.asarray(beta, dtype=float)
        if self.precompute:
            return float(
                0.5 * (beta @ (self._XtX @ beta)) - beta @ self._Xty + 0.5 * self._yty
            )
        r = self.data.X @ beta - self.data.y
        return float(0.5 * (r @ r))

    def gradient(self, beta) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        if self.precompute:
            return self._XtX @ beta - self._Xty
        return self.data.X.T @ (self.data.X @ beta - self.data.y)

    def evaluate(self, beta) -> LossEvaluation:
        return LossEvaluation(self.value(beta), self.gradient(beta))

    def lipschitz(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = gram_lipschitz(self.data.X)
        return self._lipschitz


class LogisticLoss:
    """g(beta) = sum_i log(1 + exp(-y_i x_i^T beta)) for labels in {-1, +1}.

    Values are computed with log1p/exp in an overflow-safe form; the
    gradient-Lipschitz bound is lambda_max(X^T X) / 4.
    """

    def __init__(self, data: Dataset, precompute=None):
        labels = np.unique(data.y)
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError("logistic labels must be in {-1, +1}")
        self.data = data
        self._lipschitz = None

    @property
    def num_features(self):
        return self.data.num_features

    def value(self, beta) -> float:
        margins = self.data.y * (self.data.X @ np.asarray(beta, dtype=float))
        return float(np.sum(np.logaddexp(0.0, -margins)))

    def gradient(self, beta) -> np.ndarray:
        X, y = self.data.X, self.data.y
        margins = y * (X @ np.asarray(beta, dtype=float))
        # sigma(-m) computed stably for both signs of m
        sig = np.empty_like(margins)
        pos = margins >= 0
        sig[pos] = np.exp(-margins[pos]) / (1.0 + np.exp(-margins[pos]))
        sig[~pos] = 1.0 / (1.0 + np.exp(margins[~pos]))
        return -X.T @ (y * sig)

    def evaluate(self, beta) -> LossEvaluation:
        return LossEvaluation(self.value(beta), self.gradient(beta))

    def lipschitz(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = 0.25 * gram_lipschitz(self.data.X)
        return self._lipschitz


def squared_loss(data: Dataset, beta) -> LossEvaluation:
    return SquaredLoss(data, precompute=False).evaluate(beta)


def squared_loss_lipschitz(data: Dataset, precompute=None) -> float:
    return SquaredLoss(data, precompute=precompute).lipschitz()


def logistic_loss(data: Dataset, beta) -> LossEvaluation:
    return LogisticLoss(data).evaluate(beta)


def logistic_loss_lipschitz(data: Dataset) -> float:
    return LogisticLoss(data).lipschitz()
