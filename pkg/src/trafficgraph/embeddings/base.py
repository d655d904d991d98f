from __future__ import annotations

import json
from dataclasses import asdict, dataclass, is_dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

METHODS = ("glee", "node2vec", "netmf", "graphwave")


def fingerprint(params: Any) -> str:
    """Canonical JSON of a parameter dataclass or mapping (sorted keys)."""
    data = asdict(params) if is_dataclass(params) else dict(params)
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    method: str
    rows: np.ndarray
    params_fingerprint: str
    node_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown embedding method {self.method!r}")
        if self.rows.ndim != 2:
            raise ValueError("embedding rows must be a 2-D array")
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("embedding contains non-finite entries")
        if self.node_ids is not None and len(self.node_ids) != self.rows.shape[0]:
            raise ValueError("node_ids length does not match embedding rows")
        self.rows.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.rows.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingMatrix):
            return NotImplemented
        return (
            self.method == other.method
            and self.params_fingerprint == other.params_fingerprint
            and np.array_equal(self.rows, other.rows)
        )

    __hash__ = None  # type: ignore[assignment]


def export_embedding_csv(emb: EmbeddingMatrix, path: str | Path, node_ids: Sequence[str] | None = None) -> None:
    """Write ``node_id,e0,e1,...`` rows in node-index order, 12 significant digits."""
    if node_ids is None:
        node_ids = emb.node_ids if emb.node_ids is not None else [str(i) for i in range(emb.n_nodes)]
    if len(node_ids) != emb.n_nodes:
        raise ValueError("node_ids length does not match embedding rows")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["node_id"] + [f"e{k}" for k in range(emb.dim)]) + "\n")
        for sid, row in zip(node_ids, emb.rows):
            fh.write(",".join([str(sid)] + [f"{x:.12g}" for x in row]) + "\n")


def read_embedding_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if not header or header[0] != "node_id":
            raise ValueError(f"{path}: expected header starting with node_id")
        ids, rows = [], []
        for line in fh:
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            ids.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    return ids, np.array(rows, dtype=np.float64).reshape(len(ids), len(header) - 1)
