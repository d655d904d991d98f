"""Immutable undirected sensor graph, its Laplacian and summary statistics.

External sensor ids are arbitrary strings; every matrix in the package is
indexed by the dense position of the id in ``Graph.node_ids``.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, SchemaError, SelfLoop, UnknownSensorId


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected unweighted graph in CSR form.

    ``indptr``/``indices`` hold the sorted neighbour lists; ``edges`` holds
    each undirected edge once as ``(i, j)`` with ``i < j``.
    """

    node_ids: tuple[str, ...]
    edges: frozenset[tuple[int, int]]
    indptr: np.ndarray
    indices: np.ndarray
    node_index: dict[str, int] = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    @property
    def adjacency(self) -> list[np.ndarray]:
        return [self.neighbors(i) for i in range(self.n_nodes)]

    def has_edge(self, i: int, j: int) -> bool:
        nb = self.neighbors(i)
        k = np.searchsorted(nb, j)
        return bool(k < len(nb) and nb[k] == j)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes))
        rows = np.repeat(np.arange(self.n_nodes), self.degrees)
        a[rows, self.indices] = 1.0
        return a

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_ids == other.node_ids and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.node_ids, self.edges))


@dataclass(frozen=True)
class GraphStats:
    n_nodes: int
    n_edges: int
    avg_degree: float
    n_components: int


def build_graph(edge_list: Iterable[tuple[str, str]], sensor_ids: Sequence[str]) -> Graph:
    """Build a :class:`Graph` from sensor-id pairs.

    Node order follows ``sensor_ids``. Duplicate edges (in either
    orientation) are merged; self-loops raise :class:`SelfLoop` and ids
    missing from ``sensor_ids`` raise :class:`UnknownSensorId`.
    """
    node_ids = tuple(str(s) for s in sensor_ids)
    index = {sid: i for i, sid in enumerate(node_ids)}
    if len(index) != len(node_ids):
        raise SchemaError("sensor_ids contains duplicates")

    edges: set[tuple[int, int]] = set()
    for a, b in edge_list:
        a, b = str(a), str(b)
        for sid in (a, b):
            if sid not in index:
                raise UnknownSensorId(f"sensor id {sid!r} not in sensor list")
        if a == b:
            raise SelfLoop(f"self-loop on sensor {a!r}")
        i, j = index[a], index[b]
        edges.add((i, j) if i < j else (j, i))
    return _from_dense_edges(node_ids, edges, index)


def from_index_edges(n_nodes: int, edges: Iterable[tuple[int, int]], node_ids: Sequence[str] | None = None) -> Graph:
    """Convenience constructor over dense indices (ids default to ``"0".."n-1"``)."""
    ids = [str(i) for i in range(n_nodes)] if node_ids is None else list(node_ids)
    return build_graph(((ids[i], ids[j]) for i, j in edges), ids)


def _from_dense_edges(node_ids: tuple[str, ...], edges: set[tuple[int, int]], index: dict[str, int]) -> Graph:
    n = len(node_ids)
    if edges:
        e = np.array(sorted(edges), dtype=np.int64)
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    order = np.lexsort((dst, src))
    indices = dst[order].astype(np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    indptr.setflags(write=False)
    indices.setflags(write=False)
    return Graph(node_ids, frozenset(edges), indptr, indices, index)


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``D - A`` as a dense float matrix."""
    lap = -g.adjacency_matrix()
    lap[np.diag_indices(g.n_nodes)] = g.degrees
    return lap


def connected_components(g: Graph) -> np.ndarray:
    """Component label per node, numbered in order of first node seen."""
    labels = np.full(g.n_nodes, -1, dtype=np.int64)
    current = 0
    for start in range(g.n_nodes):
        if labels[start] >= 0:
            continue
        labels[start] = current
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if labels[v] < 0:
                    labels[v] = current
                    queue.append(v)
        current += 1
    return labels


def graph_stats(g: Graph) -> GraphStats:
    n = g.n_nodes
    n_comp = int(connected_components(g).max() + 1) if n else 0
    avg = 2.0 * g.n_edges / n if n else 0.0
    return GraphStats(n, g.n_edges, avg, n_comp)


def read_edge_csv(path: str | Path) -> list[tuple[str, str]]:
    """Read an edge file with header ``src,dst``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["src", "dst"]:
            raise SchemaError(f"{path}: expected header 'src,dst', got {header!r}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"{path}: expected 2 fields", line=lineno)
            out.append((row[0].strip(), row[1].strip()))
    return out


def write_edge_csv(g: Graph, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst"])
        for i, j in sorted(g.edges):
            w.writerow([g.node_ids[i], g.node_ids[j]])
