"""NetMF: low-rank factorisation of the DeepWalk proximity matrix.

    M = log(max(vol(G) / (b*T) * (P + P^2 + ... + P^T) D^-1, 1))

with ``P = D^-1 A``. Rows/columns of degree-0 nodes are zero before the
floor, hence zero in ``M``. The embedding is ``U_d * sqrt(S_d)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimOutOfRange, NoEdges
from ..graph import Graph
from ..spectral import SVDResult, truncated_svd
from .base import EmbeddingMatrix, fingerprint


@dataclass(frozen=True)
class NetMFParams:
    window: int = 10
    negatives: int = 1
    dim: int = 16
    seed: int = 0  # the dense SVD path is deterministic; kept for config symmetry

    def __post_init__(self):
        for name in ("window", "negatives", "dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def netmf_matrix(g: Graph, window: int = 10, negatives: int = 1) -> np.ndarray:
    if g.n_edges == 0:
        raise NoEdges("NetMF needs at least one edge")
    deg = g.degrees.astype(np.float64)
    inv_deg = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    p = g.adjacency_matrix() * inv_deg[:, None]
    power = p.copy()
    acc = p.copy()
    for _ in range(window - 1):
        power = power @ p
        acc += power
    vol = deg.sum()
    m = (vol / (negatives * window)) * acc * inv_deg[None, :]
    return np.log(np.maximum(m, 1.0))


def netmf_factors(g: Graph, params: NetMFParams) -> tuple[np.ndarray, SVDResult]:
    if not 1 <= params.dim <= g.n_nodes:
        raise DimOutOfRange(f"dimension {params.dim} outside [1, {g.n_nodes}]")
    m = netmf_matrix(g, params.window, params.negatives)
    return m, truncated_svd(m, params.dim)


def netmf(g: Graph, params: NetMFParams | None = None) -> EmbeddingMatrix:
    params = params or NetMFParams()
    _, svd = netmf_factors(g, params)
    rows = svd.left_factors * np.sqrt(svd.singular_values)
    return EmbeddingMatrix("netmf", rows, fingerprint(params), g.node_ids)
