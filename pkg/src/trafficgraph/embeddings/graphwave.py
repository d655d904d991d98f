"""Structural embeddings from heat-wavelet coefficient distributions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph import Graph, laplacian
from ..spectral import eigh, heat_kernel_matrix
from .base import EmbeddingMatrix, fingerprint


@dataclass(frozen=True)
class GraphWaveParams:
    """``n_points`` sample points ``t_max/n_points, ..., t_max`` unless ``points`` is given."""

    scale: float = 1.0
    n_points: int = 50
    t_max: float = 100.0
    points: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.scale <= 0 or self.t_max <= 0:
            raise ValueError("scale and t_max must be positive")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.points is not None and len(self.points) == 0:
            raise ValueError("points must be non-empty when given")

    def sample_points(self) -> np.ndarray:
        if self.points is not None:
            return np.asarray(self.points, dtype=np.float64)
        return np.linspace(self.t_max / self.n_points, self.t_max, self.n_points)


def characteristic_embedding(psi: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Row ``a`` = [Re phi_a(t1), Im phi_a(t1), ...] where phi_a is the
    empirical characteristic function of column ``a`` of ``psi``."""
    n = psi.shape[0]
    out = np.empty((psi.shape[1], 2 * len(t)))
    for k, tk in enumerate(t):
        arg = tk * psi
        out[:, 2 * k] = np.cos(arg).sum(axis=0) / n
        out[:, 2 * k + 1] = np.sin(arg).sum(axis=0) / n
    return out


def graphwave(g: Graph, params: GraphWaveParams | None = None) -> EmbeddingMatrix:
    params = params or GraphWaveParams()
    psi = heat_kernel_matrix(eigh(laplacian(g)), params.scale)
    rows = characteristic_embedding(psi, params.sample_points())
    return EmbeddingMatrix("graphwave", rows, fingerprint(params), g.node_ids)
