"""k-nearest-neighbour scores with deterministic tie-breaking."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..errors import KTooLarge

BRUTE_FORCE_LIMIT = 20_000_000  # n_train * n_query below which distances are exact
_KD_EXTRA = 16


def _brute_force(train: np.ndarray, y: np.ndarray, query: np.ndarray, k: int) -> np.ndarray:
    out = np.empty(len(query))
    chunk = max(1, BRUTE_FORCE_LIMIT // (4 * max(len(train), 1)))
    for s in range(0, len(query), chunk):
        q = query[s : s + chunk]
        d2 = ((q[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
        # stable sort keeps lower row indices first among equal distances
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        out[s : s + chunk] = y[nearest].mean(axis=1)
    return out


def _kd_tree(train: np.ndarray, y: np.ndarray, query: np.ndarray, k: int) -> np.ndarray:
    kk = min(len(train), k + _KD_EXTRA)
    dist, idx = cKDTree(train).query(query, k=kk)
    dist = np.atleast_2d(dist).reshape(len(query), kk)
    idx = np.atleast_2d(idx).reshape(len(query), kk)
    # order by (distance, row index) among the retrieved candidates
    order = np.lexsort((idx, dist), axis=1)
    nearest = np.take_along_axis(idx, order, axis=1)[:, :k]
    return y[nearest].mean(axis=1)


def knn_scores(train_X: np.ndarray, train_y: np.ndarray, query_X: np.ndarray, k: int) -> np.ndarray:
    """Fraction of class 1 among the ``k`` nearest training rows (Euclidean).

    Equal distances go to the lower training row index. Exact for inputs below
    ``BRUTE_FORCE_LIMIT`` distance evaluations; larger inputs use a k-d tree
    and resolve ties among the ``k + 16`` nearest candidates.
    """
    train = np.asarray(train_X, dtype=np.float64)
    query = np.asarray(query_X, dtype=np.float64)
    y = np.asarray(train_y, dtype=np.float64)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(train):
        raise KTooLarge(f"k={k} exceeds {len(train)} training rows")
    if len(query) == 0:
        return np.zeros(0)
    if len(train) * len(query) <= BRUTE_FORCE_LIMIT:
        return _brute_force(train, y, query, k)
    return _kd_tree(train, y, query, k)


def knn_predict(train_table, query_rows, k: int = 5) -> np.ndarray:
    """Scores for a FeatureTable (or matrix) of queries against a training FeatureTable.

    Columns are expected to be standardised already.
    """
    query = query_rows.X if hasattr(query_rows, "X") else query_rows
    return knn_scores(train_table.X, train_table.label, query, k)
