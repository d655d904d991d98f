"""Unregularised logistic regression fitted by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyTable


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    bias: float

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return expit(self.decision_function(X))


def expit(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy, computed stably from the logits."""
    z = X @ w + b
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def logistic_gradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    r = expit(X @ w + b) - y
    return X.T @ r / len(y), float(r.mean())


def fit_logreg(
    X: np.ndarray,
    y: np.ndarray,
    learning_rate: float = 0.1,
    epochs: int = 500,
    seed: int = 0,
    init_scale: float = 0.0,
) -> LogisticModel:
    """Gradient descent from zero weights.

    ``seed`` only matters when ``init_scale > 0``, in which case the initial
    weights are drawn from N(0, init_scale^2).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTable("cannot train on an empty table")
    w = np.random.default_rng(seed).normal(0.0, init_scale, X.shape[1]) if init_scale > 0 else np.zeros(X.shape[1])
    b = 0.0
    for _ in range(epochs):
        gw, gb = logistic_gradient(w, b, X, y)
        w -= learning_rate * gw
        b -= learning_rate * gb
    return LogisticModel(w, b)


def train_logreg(table, learning_rate: float = 0.1, epochs: int = 500, seed: int = 0) -> LogisticModel:
    """Fit on a FeatureTable whose columns are already standardised."""
    if len(table) == 0:
        raise EmptyTable("feature table is empty")
    return fit_logreg(table.X, table.label, learning_rate, epochs, seed)


@dataclass(frozen=True)
class Standardizer:
    """Zero-mean / unit-variance scaling; constant columns are only centred."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        std = X.std(axis=0)
        return cls(X.mean(axis=0), np.where(std > 0, std, 1.0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
