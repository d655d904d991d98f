"""Benchmark harness: the (feature set x embedding x classifier) grid.

Embeddings are computed once per method on the full graph (they only use
topology), every classifier is fitted on the training split and scored on
the held-out split. All randomness comes from one root seed through labelled
derivation, so adding or removing grid cells never changes the others.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .classifiers import (
    METRIC_NAMES,
    EnsembleParams,
    EvalReport,
    Standardizer,
    evaluate,
    fit_ensemble,
    fit_logreg,
    knn_scores,
    predict_proba,
)
from .dataset_io import SYNTH_LABELING, EdgeConstructionConfig, SynthConfig, load_dataset, synth_generate
from .embeddings import GraphWaveParams, NetMFParams, Node2VecParams, glee, graphwave, netmf, node2vec
from .errors import ConfigError, SchemaError
from .features import LAG_COLUMNS, FeatureTable, LabelingConfig, assemble_features
from .graph import Graph

EMBEDDINGS = ("none", "glee", "node2vec", "netmf", "graphwave")
CLASSIFIERS = ("extra_trees", "random_forest", "knn", "logreg")
FEATURE_SETS = ("without_fe", "with_fe")
SPLITS = ("temporal", "random")
SEED_ENV = "IBB_LAB_SEED"


def derive_seed(root: int, *labels: object) -> int:
    """64-bit seed from the root seed and a label path such as ("classifier", "knn")."""
    digest = hashlib.sha256("/".join(str(x) for x in labels).encode()).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    state = np.random.SeedSequence([root & (2**64 - 1), *words]).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


@dataclass(frozen=True)
class DataSource:
    """Either file paths or a synthetic configuration."""

    readings: str | None = None
    sensors: str | None = None
    edges: str | None = None
    edge_config: EdgeConstructionConfig | None = None
    synth: SynthConfig | None = None

    def __post_init__(self):
        if self.synth is None and (self.readings is None or self.sensors is None):
            raise ConfigError("data source needs readings and sensors paths, or a synth config")

    def load(self) -> tuple[pd.DataFrame, pd.DataFrame, Graph]:
        if self.synth is not None:
            ds = synth_generate(self.synth)
            return ds.readings, ds.meta, ds.graph
        ds = load_dataset(self.readings, self.sensors, self.edges, self.edge_config)
        return ds.readings, ds.meta, ds.graph


@dataclass(frozen=True)
class ExternalScores:
    """Scores from a third-party classifier, CSV ``row_key,score`` over the test split."""

    path: str
    classifier: str
    embedding: str = "none"
    feature_set: str = "with_fe"


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataSource
    labeling: LabelingConfig = SYNTH_LABELING
    split: str = "temporal"
    test_fraction: float = 0.2
    embeddings: tuple[str, ...] = ("none", "glee")
    classifiers: tuple[str, ...] = ("extra_trees",)
    feature_sets: tuple[str, ...] = FEATURE_SETS
    seed: int = 0
    glee_dim: int = 16
    node2vec: Node2VecParams = field(default_factory=lambda: Node2VecParams(dim=16))
    netmf: NetMFParams = field(default_factory=NetMFParams)
    graphwave: GraphWaveParams = field(default_factory=lambda: GraphWaveParams(n_points=8, t_max=8.0))
    n_trees: int = 40
    max_features: int | None = None
    min_samples_split: int = 2
    max_depth: int | None = None
    knn_k: int = 5
    logreg_learning_rate: float = 0.1
    logreg_epochs: int = 500
    observation_offset_hours: int = 1
    external_scores: tuple[ExternalScores, ...] = ()

    def __post_init__(self):
        axes = {"embeddings": (self.embeddings, EMBEDDINGS), "classifiers": (self.classifiers, CLASSIFIERS), "feature_sets": (self.feature_sets, FEATURE_SETS)}
        for name, (chosen, allowed) in axes.items():
            if not chosen:
                raise ConfigError(f"select at least one of {name}")
            bad = [c for c in chosen if c not in allowed]
            if bad:
                raise ConfigError(f"unknown {name} {bad}; choose from {list(allowed)}")
            if len(set(chosen)) != len(chosen):
                raise ConfigError(f"duplicate entries in {name}")
        if self.split not in SPLITS:
            raise ConfigError(f"unknown split {self.split!r}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        for ext in self.external_scores:
            if ext.embedding not in EMBEDDINGS or ext.feature_set not in FEATURE_SETS:
                raise ConfigError(f"external scores {ext.path}: bad embedding or feature set")

    def resolved_seed(self) -> int:
        env = os.environ.get(SEED_ENV)
        if env is None or env.strip() == "":
            return self.seed
        try:
            return int(env, 0)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None


@dataclass(frozen=True, eq=False)
class BenchmarkTable:
    cells: dict[tuple[str, str, str], EvalReport]  # (feature_set, embedding, classifier)
    feature_sets: tuple[str, ...]
    rows: tuple[tuple[str, str], ...]  # (embedding, classifier) in config order

    def cell(self, feature_set: str, embedding: str, classifier: str) -> EvalReport:
        return self.cells[(feature_set, embedding, classifier)]

    def metric_columns(self) -> list[tuple[str, str]]:
        return [(fs, m) for fs in self.feature_sets for m in METRIC_NAMES]

    def best_rows(self) -> dict[tuple[str, str], tuple[str, str] | None]:
        """Row holding each column's maximum; the first row wins ties."""
        best = {}
        for fs, metric in self.metric_columns():
            top, arg = -math.inf, None
            for row in self.rows:
                report = self.cells.get((fs, *row))
                value = None if report is None else report.metric(metric)
                if value is not None and value > top:
                    top, arg = value, row
            best[(fs, metric)] = arg
        return best


# --- splitting and fitting -----------------------------------------------------


def split_mask(table: FeatureTable, config: ExperimentConfig, root_seed: int) -> np.ndarray:
    """Boolean test-row mask."""
    if config.split == "temporal":
        stamps = np.unique(table.timestamps)
        n_test = max(1, math.ceil(len(stamps) * config.test_fraction))
        if n_test >= len(stamps):
            raise ConfigError("temporal split leaves no training hours")
        return table.timestamps >= stamps[len(stamps) - n_test]
    rng = np.random.default_rng(derive_seed(root_seed, "split", "random"))
    n_test = max(1, math.ceil(len(table) * config.test_fraction))
    if n_test >= len(table):
        raise ConfigError("random split leaves no training rows")
    mask = np.zeros(len(table), dtype=bool)
    mask[rng.permutation(len(table))[:n_test]] = True
    return mask


def compute_embedding(name: str, graph: Graph, config: ExperimentConfig, root_seed: int):
    seed = derive_seed(root_seed, "embedding", name)
    if name == "glee":
        return glee(graph, min(config.glee_dim, graph.n_nodes))
    if name == "node2vec":
        return node2vec(graph, replace(config.node2vec, seed=seed))
    if name == "netmf":
        return netmf(graph, replace(config.netmf, dim=min(config.netmf.dim, graph.n_nodes), seed=seed))
    if name == "graphwave":
        return graphwave(graph, config.graphwave)
    raise ConfigError(f"unknown embedding {name!r}")


def score_classifier(name: str, train: FeatureTable, test: FeatureTable, config: ExperimentConfig, seed: int) -> np.ndarray:
    if name in ("extra_trees", "random_forest"):
        params = EnsembleParams(
            kind=name,
            n_trees=config.n_trees,
            max_features=config.max_features,
            min_samples_split=config.min_samples_split,
            max_depth=config.max_depth,
            seed=seed,
        )
        model = fit_ensemble(train.X, train.label, params, train.columns)
        return predict_proba(model, test)
    scaler = Standardizer.fit(train.X)
    xtr, xte = scaler.transform(train.X), scaler.transform(test.X)
    if name == "knn":
        return knn_scores(xtr, train.label, xte, config.knn_k)
    if name == "logreg":
        model = fit_logreg(xtr, train.label, config.logreg_learning_rate, config.logreg_epochs, seed)
        return model.predict_proba(xte)
    raise ConfigError(f"unknown classifier {name!r}")


def read_external_scores(path: str | Path, keys: Sequence[str]) -> np.ndarray:
    df = pd.read_csv(path, dtype={"row_key": str})
    if list(df.columns) != ["row_key", "score"]:
        raise SchemaError(f"{path}: expected header row_key,score")
    if df["row_key"].duplicated().any():
        raise SchemaError(f"{path}: duplicate row keys")
    scores = df.set_index("row_key")["score"].reindex(list(keys))
    if scores.isna().any():
        missing = scores.index[scores.isna()][:3].tolist()
        raise SchemaError(f"{path}: no score for test rows such as {missing}")
    return scores.to_numpy(dtype=np.float64)


def prepare_tables(config: ExperimentConfig, root_seed: int | None = None):
    """Yield ``(embedding, feature_set, train, test)`` in config order."""
    root = config.resolved_seed() if root_seed is None else root_seed
    readings, meta, graph = config.data.load()
    for emb_name in config.embeddings:
        emb = None if emb_name == "none" else compute_embedding(emb_name, graph, config, root)
        full = assemble_features(
            readings, meta, config.labeling, emb, observation_offset_hours=config.observation_offset_hours
        )
        test = split_mask(full, config, root)
        for fs in config.feature_sets:
            table = full if fs == "with_fe" else full.without_columns(LAG_COLUMNS)
            yield emb_name, fs, table.select(~test), table.select(test)


def run_experiment(config: ExperimentConfig) -> BenchmarkTable:
    """Evaluate every selected cell on the held-out split.

    The root seed is ``config.seed`` unless the ``IBB_LAB_SEED`` environment
    variable overrides it.
    """
    root = config.resolved_seed()
    cells: dict[tuple[str, str, str], EvalReport] = {}
    for emb_name, fs, train, test in prepare_tables(config, root):
        for clf in config.classifiers:
            seed = derive_seed(root, "classifier", clf, emb_name, fs)
            scores = score_classifier(clf, train, test, config, seed)
            cells[(fs, emb_name, clf)] = evaluate(scores, test.label, cell_id=(emb_name, clf, fs))
        for ext in config.external_scores:
            if (ext.embedding, ext.feature_set) == (emb_name, fs):
                scores = read_external_scores(ext.path, test.row_keys())
                cells[(fs, emb_name, ext.classifier)] = evaluate(scores, test.label, cell_id=(emb_name, ext.classifier, fs))
    rows = [(e, c) for e in config.embeddings for c in config.classifiers]
    rows += [(x.embedding, x.classifier) for x in config.external_scores if (x.embedding, x.classifier) not in rows]
    return BenchmarkTable(cells, tuple(config.feature_sets), tuple(rows))


# --- reports --------------------------------------------------------------------


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.4f}"


def emit_report(table: BenchmarkTable, fmt: str = "markdown") -> str:
    """One row per (embedding, classifier) with a block of five metrics per
    feature set. Markdown bolds each column's best value; CSV lists them in a
    trailing ``best_in`` column so the numeric cells stay plain."""
    columns = table.metric_columns()
    best = table.best_rows()
    names = [f"{fs}_{m}" for fs, m in columns]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["embedding", "classifier", *names, "best_in"])
        for row in table.rows:
            values, marks = [], []
            for (fs, m), name in zip(columns, names):
                report = table.cells.get((fs, *row))
                values.append(_fmt(None if report is None else report.metric(m)))
                if best[(fs, m)] == row:
                    marks.append(name)
            w.writerow([*row, *values, ";".join(marks)])
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| embedding | classifier | " + " | ".join(names) + " |", "|---|---|" + "---:|" * len(names)]
        for row in table.rows:
            cells = []
            for fs, m in columns:
                report = table.cells.get((fs, *row))
                text = _fmt(None if report is None else report.metric(m)) or "n/a"
                cells.append(f"**{text}**" if best[(fs, m)] == row else text)
            lines.append(f"| {row[0]} | {row[1]} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def parse_csv_report(text: str) -> dict[tuple[str, str], dict[str, float | None]]:
    """Inverse of the CSV report: {(embedding, classifier): {column: value}}."""
    out = {}
    for rec in csv.DictReader(io.StringIO(text)):
        key = (rec.pop("embedding"), rec.pop("classifier"))
        rec.pop("best_in", None)
        out[key] = {k: (float(v) if v != "" else None) for k, v in rec.items()}
    return out
