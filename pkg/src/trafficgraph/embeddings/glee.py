"""Geometric Laplacian eigenmap embedding.

The default variant keeps the ``d`` largest Laplacian eigenpairs and scales
each eigenvector by the square root of its eigenvalue, giving ``Y`` with
``Y^T Y = diag(lam)`` and maximal ``tr(Y^T L Y)``. ``variant="le"`` gives the
classical Laplacian-eigenmaps coordinates instead (smallest non-trivial
eigenvectors, unscaled) for comparison.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimOutOfRange
from ..graph import Graph, laplacian
from ..spectral import EigenDecomposition, eigh
from .base import EmbeddingMatrix, fingerprint


def glee_from_eig(eig: EigenDecomposition, d: int, variant: str = "glee") -> np.ndarray:
    n = eig.eigenvalues.shape[0]
    if variant == "glee":
        if not 1 <= d <= n:
            raise DimOutOfRange(f"dimension {d} outside [1, {n}]")
        cols = np.arange(n - 1, n - 1 - d, -1)  # largest first
        lam = np.clip(eig.eigenvalues[cols], 0.0, None)
        return eig.eigenvectors[:, cols] * np.sqrt(lam)
    if variant == "le":
        if not 1 <= d <= n - 1:
            raise DimOutOfRange(f"dimension {d} outside [1, {n - 1}] for the LE variant")
        return eig.eigenvectors[:, 1 : d + 1].copy()
    raise ValueError(f"unknown GLEE variant {variant!r}")


def glee(g: Graph, d: int, variant: str = "glee", backend: str = "lapack") -> EmbeddingMatrix:
    if not 1 <= d <= g.n_nodes:
        raise DimOutOfRange(f"dimension {d} outside [1, {g.n_nodes}]")
    eig = eigh(laplacian(g), backend=backend)
    rows = glee_from_eig(eig, d, variant)
    return EmbeddingMatrix("glee", rows, fingerprint({"d": d, "variant": variant}), g.node_ids)


def gaussian_affinity(points: np.ndarray, sigma: float) -> np.ndarray:
    """Weights ``exp(-|x_i - x_j|^2 / (2 sigma^2))`` with a zero diagonal."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(points, dtype=np.float64)
    sq = np.sum(x * x, axis=1)
    dist2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * x @ x.T, 0.0)
    a = np.exp(-dist2 / (2.0 * sigma * sigma))
    np.fill_diagonal(a, 0.0)
    return a


def glee_from_points(points: np.ndarray, d: int, sigma: float, variant: str = "glee") -> np.ndarray:
    """GLEE on the Gaussian-kernel graph of a point cloud."""
    a = gaussian_affinity(points, sigma)
    lap = np.diag(a.sum(axis=1)) - a
    return glee_from_eig(eigh(lap), d, variant)
