"""Extremely randomized trees and random forests for binary labels.

Both ensembles grow unpruned CART-style trees scored by Gini impurity
decrease. Extra-trees grow every tree on the full training set and try one
uniform random cut per candidate feature; random forests grow on a bootstrap
sample and search every cut between consecutive distinct values. Tree ``t``
draws all of its randomness from ``tree_seed(seed, t)``, so adding trees never
changes the existing ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numba
import numpy as np

from ..errors import ColumnMismatch, EmptyTable

KINDS = ("extra_trees", "random_forest")
FORMAT_HEADER = "# trafficgraph tree-ensemble v1"


@dataclass(frozen=True)
class EnsembleParams:
    kind: str = "extra_trees"
    n_trees: int = 100
    max_features: int | None = None  # None -> ceil(sqrt(n_columns))
    min_samples_split: int = 2
    max_depth: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")

    def resolved_max_features(self, n_columns: int) -> int:
        mf = math.ceil(math.sqrt(n_columns)) if self.max_features is None else self.max_features
        if not 1 <= mf <= n_columns:
            raise ValueError(f"max_features {mf} outside [1, {n_columns}]")
        return mf


@dataclass(frozen=True, eq=False)
class Tree:
    """Node arrays; ``feature == -1`` marks a leaf, ``value`` is its class-1 fraction."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())


@dataclass(frozen=True, eq=False)
class TreeEnsembleModel:
    trees: list[Tree]
    params: EnsembleParams
    column_manifest: tuple[str, ...]


def tree_seed(seed: int, tree_index: int) -> int:
    return int(np.random.SeedSequence([seed & (2**64 - 1), tree_index]).generate_state(1)[0])


# --- compiled kernels ------------------------------------------------------


@numba.njit(cache=True)
def _gini(pos, n):
    f = pos / n
    return 1.0 - f * f - (1.0 - f) * (1.0 - f)


@numba.njit(cache=True)
def _swap_rows(X, y, i, j):
    for c in range(X.shape[1]):
        tmp = X[i, c]
        X[i, c] = X[j, c]
        X[j, c] = tmp
    ty = y[i]
    y[i] = y[j]
    y[j] = ty


@numba.njit(cache=True)
def _partition(X, y, s, e, f, t):
    i = s
    j = e - 1
    while i <= j:
        if X[i, f] <= t:
            i += 1
        else:
            _swap_rows(X, y, i, j)
            j -= 1
    return i


@numba.njit(cache=True)
def _best_random_cut(X, y, s, e, pos, feats, max_features, cand, lo, hi, cuts, nl, pl):
    # One uniform cut per drawn feature; constant features are skipped and
    # do not count towards max_features. Candidates are scanned in batches so
    # each row is read once per pass rather than once per feature.
    m = e - s
    p = X.shape[1]
    for j in range(p):
        feats[j] = j
    avail = p
    n_cand = 0
    while n_cand < max_features and avail > 0:
        first = n_cand
        while n_cand < max_features and avail > 0:
            r = np.random.randint(0, avail)
            f = feats[r]
            feats[r] = feats[avail - 1]
            feats[avail - 1] = f
            avail -= 1
            cand[n_cand] = f
            lo[n_cand] = X[s, f]
            hi[n_cand] = X[s, f]
            n_cand += 1
        for i in range(s + 1, e):
            for c in range(first, n_cand):
                v = X[i, cand[c]]
                if v < lo[c]:
                    lo[c] = v
                elif v > hi[c]:
                    hi[c] = v
        keep = first
        for c in range(first, n_cand):
            if hi[c] > lo[c]:
                cand[keep] = cand[c]
                lo[keep] = lo[c]
                hi[keep] = hi[c]
                keep += 1
        n_cand = keep
    if n_cand == 0:
        return -1, 0.0
    for c in range(n_cand):
        cuts[c] = lo[c] + (hi[c] - lo[c]) * np.random.random()
        nl[c] = 0
        pl[c] = 0
    for i in range(s, e):
        yi = y[i]
        for c in range(n_cand):
            if X[i, cand[c]] <= cuts[c]:
                nl[c] += 1
                pl[c] += yi
    parent = _gini(pos, m)
    best_gain = -1.0
    best_f = -1
    best_t = 0.0
    for c in range(n_cand):
        nr = m - nl[c]
        if nl[c] == 0 or nr == 0:
            continue
        gain = parent - (nl[c] * _gini(pl[c], nl[c]) + nr * _gini(pos - pl[c], nr)) / m
        if gain > best_gain:
            best_gain = gain
            best_f = cand[c]
            best_t = cuts[c]
    return best_f, best_t


@numba.njit(cache=True)
def _best_exhaustive_cut(X, y, s, e, pos, feats, max_features, vals, labs):
    m = e - s
    p = X.shape[1]
    for j in range(p):
        feats[j] = j
    avail = p
    drawn = 0
    parent = _gini(pos, m)
    best_gain = -1.0
    best_f = -1
    best_t = 0.0
    while drawn < max_features and avail > 0:
        r = np.random.randint(0, avail)
        f = feats[r]
        feats[r] = feats[avail - 1]
        feats[avail - 1] = f
        avail -= 1
        for i in range(m):
            vals[i] = X[s + i, f]
        order = np.argsort(vals[:m], kind="mergesort")
        if not vals[order[m - 1]] > vals[order[0]]:
            continue
        drawn += 1
        for i in range(m):
            labs[i] = y[s + order[i]]
        pl = 0
        for k in range(m - 1):
            pl += labs[k]
            a = vals[order[k]]
            b = vals[order[k + 1]]
            if not b > a:
                continue
            nl = k + 1
            nr = m - nl
            gain = parent - (nl * _gini(pl, nl) + nr * _gini(pos - pl, nr)) / m
            if gain > best_gain:
                best_gain = gain
                best_f = f
                mid = a + (b - a) * 0.5
                best_t = mid if mid < b else a
    return best_f, best_t


@numba.njit(cache=True)
def _grow(X, y, max_features, min_split, max_depth, exhaustive, seed):
    np.random.seed(seed)
    n, p = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int32)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    value = np.zeros(cap)
    count = np.zeros(cap, np.int64)
    stack = np.empty((cap, 4), np.int64)
    feats = np.empty(p, np.int64)
    vals = np.empty(n if exhaustive else 1)
    labs = np.empty(n if exhaustive else 1, np.int64)
    cand = np.empty(p, np.int64)
    lo = np.empty(p)
    hi = np.empty(p)
    cuts = np.empty(p)
    nl = np.empty(p, np.int64)
    pl = np.empty(p, np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    sp = 1
    n_nodes = 1
    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        s = stack[sp, 1]
        e = stack[sp, 2]
        d = stack[sp, 3]
        m = e - s
        pos = 0
        for i in range(s, e):
            pos += y[i]
        value[node] = pos / m
        count[node] = m
        if pos == 0 or pos == m or m < min_split or (max_depth >= 0 and d >= max_depth):
            continue
        if exhaustive:
            f, t = _best_exhaustive_cut(X, y, s, e, pos, feats, max_features, vals, labs)
        else:
            f, t = _best_random_cut(X, y, s, e, pos, feats, max_features, cand, lo, hi, cuts, nl, pl)
        if f < 0:
            continue
        mid = _partition(X, y, s, e, f, t)
        feature[node] = f
        threshold[node] = t
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack[sp, 0] = n_nodes
        stack[sp, 1] = s
        stack[sp, 2] = mid
        stack[sp, 3] = d + 1
        stack[sp + 1, 0] = n_nodes + 1
        stack[sp + 1, 1] = mid
        stack[sp + 1, 2] = e
        stack[sp + 1, 3] = d + 1
        sp += 2
        n_nodes += 2
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        count[:n_nodes].copy(),
    )


@numba.njit(cache=True)
def _predict(X, roots, nodes):
    # nodes[k] = (feature, threshold or leaf value, left child); right = left + 1
    n_trees = roots.shape[0]
    out = np.zeros(X.shape[0])
    for i in range(X.shape[0]):
        acc = 0.0
        for t in range(n_trees):
            k = roots[t]
            f = int(nodes[k, 0])
            while f >= 0:
                k = int(nodes[k, 2]) + (0 if X[i, f] <= nodes[k, 1] else 1)
                f = int(nodes[k, 0])
            acc += nodes[k, 1]
        out[i] = acc / n_trees
    return out


# --- public API ------------------------------------------------------------


def grow_tree(X: np.ndarray, y: np.ndarray, params: EnsembleParams, tree_index: int) -> Tree:
    seed = tree_seed(params.seed, tree_index)
    mf = params.resolved_max_features(X.shape[1])
    if params.kind == "random_forest":
        rng = np.random.default_rng(seed)
        boot = rng.integers(0, X.shape[0], size=X.shape[0])
        Xw, yw = X[boot], y[boot]
    else:
        Xw, yw = X.copy(), y.copy()
    arrays = _grow(
        np.ascontiguousarray(Xw, dtype=np.float64),
        np.ascontiguousarray(yw, dtype=np.int64),
        mf,
        params.min_samples_split,
        -1 if params.max_depth is None else params.max_depth,
        params.kind == "random_forest",
        np.uint32(seed),
    )
    return Tree(*arrays)


def fit_ensemble(X: np.ndarray, y: np.ndarray, params: EnsembleParams, columns: Sequence[str] | None = None) -> TreeEnsembleModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTable("cannot train on an empty table")
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y have different lengths")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    cols = tuple(columns) if columns is not None else tuple(f"x{k}" for k in range(X.shape[1]))
    if len(cols) != X.shape[1]:
        raise ColumnMismatch("column names do not match X width")
    trees = [grow_tree(X, y, params, t) for t in range(params.n_trees)]
    return TreeEnsembleModel(trees, params, cols)


def train_ensemble(table, params: EnsembleParams) -> TreeEnsembleModel:
    """Fit on a :class:`~trafficgraph.features.FeatureTable`."""
    if len(table) == 0:
        raise EmptyTable("feature table is empty")
    return fit_ensemble(table.X, table.label, params, table.columns)


def _as_matrix(model: TreeEnsembleModel, rows) -> np.ndarray:
    if hasattr(rows, "columns") and hasattr(rows, "X"):
        if tuple(rows.columns) != model.column_manifest:
            raise ColumnMismatch("query columns differ from the training manifest")
        rows = rows.X
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != len(model.column_manifest):
        raise ColumnMismatch(f"expected {len(model.column_manifest)} columns, got {X.shape[1]}")
    return np.ascontiguousarray(X)


def _packed(model: TreeEnsembleModel) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.array([t.n_nodes for t in model.trees], dtype=np.int64)
    roots = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    nodes = np.empty((int(sizes.sum()), 3))
    for root, t in zip(roots, model.trees):
        block = nodes[root : root + t.n_nodes]
        leaf = t.feature < 0
        if np.any(t.right[~leaf] != t.left[~leaf] + 1):
            raise ValueError("tree nodes must store the right child directly after the left")
        block[:, 0] = t.feature
        block[:, 1] = np.where(leaf, t.value, t.threshold)
        block[:, 2] = np.where(leaf, -1, t.left.astype(np.int64) + root)
    return roots, nodes


def predict_proba(model: TreeEnsembleModel, rows) -> np.ndarray:
    """Mean leaf class-1 fraction over trees."""
    X = _as_matrix(model, rows)
    return _predict(X, *_packed(model))


def predict(model: TreeEnsembleModel, rows, threshold: float = 0.5) -> np.ndarray:
    return (predict_proba(model, rows) >= threshold).astype(np.int8)


# --- flat-text model format --------------------------------------------------


def dumps_model(model: TreeEnsembleModel) -> str:
    p = model.params
    lines = [
        FORMAT_HEADER,
        f"kind {p.kind}",
        f"n_trees {p.n_trees}",
        f"max_features {'none' if p.max_features is None else p.max_features}",
        f"min_samples_split {p.min_samples_split}",
        f"max_depth {'none' if p.max_depth is None else p.max_depth}",
        f"seed {p.seed}",
        "columns " + ",".join(model.column_manifest),
    ]
    for k, t in enumerate(model.trees):
        lines.append(f"tree {k} {t.n_nodes}")
        for i in range(t.n_nodes):
            lines.append(
                f"{i} {int(t.feature[i])} {float(t.threshold[i])!r} {int(t.left[i])} "
                f"{int(t.right[i])} {float(t.value[i])!r} {int(t.count[i])}"
            )
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> TreeEnsembleModel:
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        raise ValueError("not a tree-ensemble model file")
    header: dict[str, str] = {}
    pos = 1
    while pos < len(lines) and not lines[pos].startswith("tree "):
        key, _, val = lines[pos].partition(" ")
        header[key] = val
        pos += 1
    opt = lambda v: None if v == "none" else int(v)
    params = EnsembleParams(
        kind=header["kind"],
        n_trees=int(header["n_trees"]),
        max_features=opt(header["max_features"]),
        min_samples_split=int(header["min_samples_split"]),
        max_depth=opt(header["max_depth"]),
        seed=int(header["seed"]),
    )
    columns = tuple(header["columns"].split(",")) if header.get("columns") else ()
    trees = []
    while pos < len(lines):
        _, _, n_nodes = lines[pos].split()
        n = int(n_nodes)
        rec = [ln.split() for ln in lines[pos + 1 : pos + 1 + n]]
        arr = np.array(rec, dtype=object).reshape(n, 7) if n else np.zeros((0, 7), dtype=object)
        trees.append(
            Tree(
                arr[:, 1].astype(np.int32),
                arr[:, 2].astype(np.float64),
                arr[:, 3].astype(np.int32),
                arr[:, 4].astype(np.int32),
                arr[:, 5].astype(np.float64),
                arr[:, 6].astype(np.int64),
            )
        )
        pos += 1 + n
    if len(trees) != params.n_trees:
        raise ValueError(f"model declares {params.n_trees} trees but lists {len(trees)}")
    return TreeEnsembleModel(trees, params, columns)


def save_model(model: TreeEnsembleModel, path: str | Path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path: str | Path) -> TreeEnsembleModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))
