"""Second-order biased random walks and skip-gram training with negative sampling.

Every walk draws from its own random stream, seeded from
``(seed, start_node, walk_index)``, so walks can be generated in any order
or partition without changing the corpus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..errors import EmptyCorpus
from ..graph import Graph
from .base import EmbeddingMatrix, fingerprint

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Node2VecParams:
    p: float = 1.0
    q: float = 1.0
    walk_length: int = 40
    walks_per_node: int = 10
    window: int = 5
    dim: int = 64
    negatives: int = 5
    epochs: int = 3
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if self.walk_length < 2:
            raise ValueError("walk_length must be >= 2")
        for name in ("walks_per_node", "window", "dim", "negatives"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True, eq=False)
class WalkCorpus:
    """Walks stored row-wise; ``walks[k, :lengths[k]]`` is walk ``k``, padding is -1."""

    walks: np.ndarray
    lengths: np.ndarray
    seed: int

    def __len__(self) -> int:
        return self.walks.shape[0]

    def __iter__(self):
        for row, n in zip(self.walks, self.lengths):
            yield row[:n].tolist()


@numba.njit(cache=True)
def _splitmix64(x):
    z = x + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _walk_seed(seed, node, walk_index):
    h = _splitmix64(seed)
    h = _splitmix64(h ^ np.uint64(node))
    h = _splitmix64(h ^ np.uint64(walk_index))
    return np.uint32(h >> np.uint64(32))


@numba.njit(cache=True)
def _contains(indptr, indices, u, x):
    lo = indptr[u]
    hi = indptr[u + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        if indices[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < indptr[u + 1] and indices[lo] == x


@numba.njit(cache=True)
def _generate_walks(indptr, indices, n_nodes, max_degree, walks_per_node, walk_length, inv_p, inv_q, seed):
    n_walks = n_nodes * walks_per_node
    walks = np.full((n_walks, walk_length), -1, dtype=np.int64)
    lengths = np.ones(n_walks, dtype=np.int64)
    weights = np.empty(max(1, max_degree))
    for r in range(walks_per_node):
        for u in range(n_nodes):
            w = r * n_nodes + u
            np.random.seed(_walk_seed(seed, u, r))
            walks[w, 0] = u
            deg = indptr[u + 1] - indptr[u]
            if deg == 0:
                continue
            walks[w, 1] = indices[indptr[u] + np.random.randint(0, deg)]
            length = 2
            while length < walk_length:
                t = walks[w, length - 2]
                v = walks[w, length - 1]
                start = indptr[v]
                deg = indptr[v + 1] - start
                total = 0.0
                for k in range(deg):
                    x = indices[start + k]
                    if x == t:
                        a = inv_p
                    elif _contains(indptr, indices, t, x):
                        a = 1.0
                    else:
                        a = inv_q
                    total += a
                    weights[k] = total
                target = np.random.random() * total
                pick = deg - 1
                for k in range(deg):
                    if target < weights[k]:
                        pick = k
                        break
                walks[w, length] = indices[start + pick]
                length += 1
            lengths[w] = length
    return walks, lengths


def node2vec_walks(g: Graph, params: Node2VecParams) -> WalkCorpus:
    """Biased walks: ``walks_per_node`` rounds, each starting once from every node.

    From ``v`` having arrived from ``t``, neighbour ``x`` is chosen with weight
    ``1/p`` if ``x == t``, ``1`` if ``x`` is adjacent to ``t`` and ``1/q``
    otherwise. Isolated nodes yield singleton walks.
    """
    if g.n_nodes == 0:
        raise EmptyCorpus("cannot walk on an empty graph")
    walks, lengths = _generate_walks(
        g.indptr,
        g.indices,
        g.n_nodes,
        int(g.degrees.max()),
        params.walks_per_node,
        params.walk_length,
        1.0 / params.p,
        1.0 / params.q,
        np.uint64(params.seed & _MASK64),
    )
    return WalkCorpus(walks, lengths, params.seed)


def transition_probabilities(g: Graph, t: int, v: int, p: float, q: float) -> dict[int, float]:
    """Normalised second-order transition law out of ``v`` after arriving from ``t``."""
    nbrs = g.neighbors(v)
    w = np.array([1.0 / p if x == t else (1.0 if g.has_edge(t, x) else 1.0 / q) for x in nbrs])
    return {int(x): float(wx) for x, wx in zip(nbrs, w / w.sum())}


@numba.njit(cache=True)
def _sample_cdf(cdf):
    r = np.random.random() * cdf[-1]
    lo = 0
    hi = cdf.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cdf[mid] > r:
            hi = mid
        else:
            lo = mid + 1
    return lo


@numba.njit(cache=True)
def _count_pairs(lengths, window):
    total = 0
    for L in lengths:
        for i in range(L):
            total += min(L, i + window + 1) - max(0, i - window) - 1
    return total


@numba.njit(cache=True)
def _train_sgns(walks, lengths, w_in, w_out, window, negatives, epochs, lr0, cdf, seed):
    np.random.seed(seed)
    dim = w_in.shape[1]
    total = _count_pairs(lengths, window) * epochs
    if total == 0:
        return
    done = 0
    grad = np.empty(dim)
    for _ in range(epochs):
        for w in range(walks.shape[0]):
            L = lengths[w]
            for i in range(L):
                center = walks[w, i]
                for j in range(max(0, i - window), min(L, i + window + 1)):
                    if j == i:
                        continue
                    context = walks[w, j]
                    lr = lr0 * max(1e-4, 1.0 - done / total)
                    grad[:] = 0.0
                    for k in range(negatives + 1):
                        if k == 0:
                            target = context
                            label = 1.0
                        else:
                            target = _sample_cdf(cdf)
                            if target == context:
                                continue
                            label = 0.0
                        f = 0.0
                        for c in range(dim):
                            f += w_in[center, c] * w_out[target, c]
                        if f > 6.0:
                            sig = 1.0 / (1.0 + np.exp(-6.0))
                        elif f < -6.0:
                            sig = 1.0 / (1.0 + np.exp(6.0))
                        else:
                            sig = 1.0 / (1.0 + np.exp(-f))
                        gcoef = (label - sig) * lr
                        for c in range(dim):
                            grad[c] += gcoef * w_out[target, c]
                            w_out[target, c] += gcoef * w_in[center, c]
                    for c in range(dim):
                        w_in[center, c] += grad[c]
                    done += 1


def node2vec_embed(corpus: WalkCorpus, g: Graph, params: Node2VecParams) -> EmbeddingMatrix:
    """Skip-gram with negative sampling over the walk corpus.

    Input vectors start uniform in ``[-0.5/dim, 0.5/dim)`` and output vectors
    at zero; the learning rate decays linearly to ``1e-4 * learning_rate``.
    Negatives follow walk frequency raised to the power 0.75.
    """
    if len(corpus) == 0:
        raise EmptyCorpus("walk corpus is empty")
    rng = np.random.default_rng([params.seed, 0x5EED])
    w_in = (rng.random((g.n_nodes, params.dim)) - 0.5) / params.dim
    w_out = np.zeros((g.n_nodes, params.dim))
    valid = corpus.walks[corpus.walks >= 0]
    freq = np.bincount(valid, minlength=g.n_nodes).astype(np.float64) ** 0.75
    cdf = np.cumsum(freq)
    _train_sgns(
        corpus.walks,
        corpus.lengths,
        w_in,
        w_out,
        params.window,
        params.negatives,
        params.epochs,
        params.learning_rate,
        cdf,
        np.uint32(int(rng.integers(0, 2**32))),
    )
    return EmbeddingMatrix("node2vec", w_in, fingerprint(params), g.node_ids)


def node2vec(g: Graph, params: Node2VecParams | None = None) -> EmbeddingMatrix:
    params = params or Node2VecParams()
    return node2vec_embed(node2vec_walks(g, params), g, params)
