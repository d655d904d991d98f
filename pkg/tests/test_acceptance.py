"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line that is printed in the terminal
summary. Run alone with ``pytest tests/test_acceptance.py -v``.
"""

from __future__ import annotations

import math
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from trafficgraph.classifiers import EnsembleParams, fit_ensemble, logistic_gradient, logistic_loss, predict
from trafficgraph.dataset_io import SynthConfig
from trafficgraph.embeddings import GraphWaveParams, NetMFParams, glee, graphwave, netmf_factors
from trafficgraph.features import congestion_label_speed, congestion_label_speed_volume
from trafficgraph.graph import graph_stats, laplacian
from trafficgraph.oracles import (
    charpoly_eigenvalues,
    check_auroc,
    check_walk_law,
    cycle_graph,
    path_graph,
    random_connected_graph,
    star_graph,
)
from trafficgraph.classifiers import auroc
from trafficgraph.pipeline import DataSource, ExperimentConfig, emit_report, run_experiment
from trafficgraph.spectral import eigh, heat_kernel_matrix

from conftest import ACCEPTANCE_LINES


@contextmanager
def criterion(number: int | str, title: str, budget_s: float | None = None):
    """Record PASS/FAIL for one criterion; a blown runtime budget is a failure."""
    start = time.perf_counter()
    notes: list[str] = []
    try:
        yield notes
        elapsed = time.perf_counter() - start
        if budget_s is not None:
            assert elapsed < budget_s, f"runtime {elapsed:.1f}s exceeds {budget_s:g}s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        kind = "SKIP" if isinstance(exc, pytest.skip.Exception) else "FAIL"
        ACCEPTANCE_LINES.append(f"{kind} criterion {number} {title} ({elapsed:.1f}s): {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}")
        raise
    extra = f"; {'; '.join(notes)}" if notes else ""
    ACCEPTANCE_LINES.append(f"PASS criterion {number} {title} ({elapsed:.1f}s{extra})")


def test_criterion_1_glee_exactness():
    with criterion(1, "GLEE exactness", 10.0) as notes:
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(2, 51))
            g = random_connected_graph(n, rng)
            lap = laplacian(g)
            lam = np.linalg.eigvalsh(lap)
            assert np.allclose(eigh(lap, "ql").eigenvalues, lam, atol=1e-9)
            if n <= 4:
                assert np.allclose(charpoly_eigenvalues(lap), lam, atol=1e-9)
            full = glee(g, n).rows
            worst = max(worst, np.abs(full @ full.T - lap).max())
            assert np.abs(full @ full.T - lap).max() <= 1e-8
            for d in range(1, min(5, n) + 1):
                y = glee(g, d).rows
                top = lam[::-1][:d]
                gram = y.T @ y
                off = gram - np.diag(np.diag(gram))
                assert np.abs(off).max() <= 1e-8
                assert abs(np.trace(gram) - top.sum()) <= 1e-8 * max(1.0, top.sum())
                # Y^T L Y = diag(lam^2), so the attained trace is the sum of squares
                assert abs(np.trace(y.T @ lap @ y) - np.sum(top**2)) <= 1e-8 * max(1.0, np.sum(top**2))
                u = eigh(lap).eigenvectors[:, ::-1][:, :d]
                assert abs(np.trace(u.T @ lap @ u) - top.sum()) <= 1e-8 * max(1.0, top.sum())
        notes.append(f"max |YY^T - L| {worst:.1e}; tr(Y^T L Y) equals the sum of squared top eigenvalues")


@pytest.mark.xfail(strict=True, reason="with Y^T Y = diag(lam) the trace tr(Y^T L Y) equals the sum of lam^2, not lam")
def test_criterion_1_literal_trace_clause():
    g = cycle_graph(6)  # top eigenvalues 4, 3, 3
    lap = laplacian(g)
    y = glee(g, 3).rows
    top = np.sort(np.linalg.eigvalsh(lap))[::-1][:3]
    ACCEPTANCE_LINES.append(
        f"XFAIL criterion 1 literal trace clause: tr(Y^T L Y) = {np.trace(y.T @ lap @ y):.4f}, "
        f"sum of top eigenvalues = {top.sum():.4f}, sum of their squares = {np.sum(top**2):.4f}"
    )
    assert abs(np.trace(y.T @ lap @ y) - top.sum()) <= 1e-8


def test_criterion_2_walk_law():
    with criterion(2, "Node2Vec walk law", 30.0) as notes:
        results = []
        for name, g in (("path3", path_graph(3)), ("cycle4", cycle_graph(4))):
            for p, q in ((1.0, 1.0), (0.5, 2.0), (4.0, 0.25)):
                results.append(check_walk_law(p, q, g, name, min_steps=1_000_000, tol=0.01))
        failed = [r.line() for r in results if not r.passed]
        assert not failed, failed
        notes.append(f"{len(results)} laws within 0.01")


def test_criterion_3_netmf_optimality():
    with criterion(3, "NetMF optimality", 10.0):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(2, 31))
            g = random_connected_graph(n, rng)
            d = int(rng.integers(1, n + 1))
            m, svd = netmf_factors(g, NetMFParams(dim=d))
            assert m.min() >= 0.0
            sigma = np.linalg.svd(m, compute_uv=False)
            tail = math.sqrt(float(np.sum(sigma[d:] ** 2)))
            err = np.linalg.norm(m - svd.reconstruct(), "fro")
            assert abs(err - tail) <= 1e-8


def test_criterion_4_graphwave_structure():
    with criterion(4, "GraphWave structure", 5.0):
        params = GraphWaveParams()
        star = graphwave(star_graph(5), params).rows
        assert np.abs(star[1:] - star[1]).max() <= 1e-8
        cyc = graphwave(cycle_graph(6), params).rows
        assert np.abs(cyc - cyc[0]).max() <= 1e-8
        for g in (star_graph(5), cycle_graph(6), path_graph(7)):
            psi = heat_kernel_matrix(eigh(laplacian(g)), params.scale)
            assert np.abs(psi.sum(axis=0) - 1.0).max() <= 1e-8
            rows = graphwave(g, params).rows
            assert (rows[:, 0::2] ** 2 + rows[:, 1::2] ** 2).max() <= 1.0 + 1e-12


def test_criterion_5_labeling():
    with criterion(5, "labeling table") as notes:
        assert congestion_label_speed(0.0, 0.5) == 1
        assert congestion_label_speed(1.0, 0.5) == 0
        assert congestion_label_speed_volume(0.0, 10, 0.5) == 1
        assert congestion_label_speed_volume(10.0, 100, 0.6) == 0
        rng = np.random.default_rng(5)
        n = 100_000
        s1, s2 = rng.uniform(0, 100, n), rng.uniform(0, 100, n)
        v1, v2 = rng.integers(1, 300, n), rng.integers(1, 300, n)
        tau = rng.uniform(0.001, 0.999, n)
        for a, b, va, vb, t in zip(s1.tolist(), s2.tolist(), v1.tolist(), v2.tolist(), tau.tolist()):
            lo, hi = (a, b) if a <= b else (b, a)
            assert congestion_label_speed(lo, t) >= congestion_label_speed(hi, t)
            assert congestion_label_speed_volume(lo, va, t) <= congestion_label_speed_volume(hi, va, t)
            few, many = (va, vb) if va <= vb else (vb, va)
            assert congestion_label_speed_volume(a, few, t) >= congestion_label_speed_volume(a, many, t)
        notes.append(f"{n} random triples")


def test_criterion_6_metrics_oracle():
    with criterion(6, "AUROC oracle") as notes:
        result = check_auroc(n_instances=1000, max_points=200)
        assert result.passed, result.detail
        assert auroc([0.9, 0.8, 0.3, 0.2], [1, 0, 1, 0]) == 0.75
        notes.append(result.detail)


def test_criterion_7_trees_and_gradient():
    with criterion(7, "ExtraTrees fit and logistic gradient") as notes:
        rng = np.random.default_rng(11)
        X = rng.uniform(-1, 1, size=(500, 1))
        y = (X[:, 0] >= 0).astype(int)
        params = EnsembleParams("extra_trees", n_trees=20, seed=4)
        first, second = fit_ensemble(X, y, params), fit_ensemble(X, y, params)
        assert np.mean(predict(first, X) == y) == 1.0
        assert np.array_equal(predict(first, X), predict(second, X))
        Xb = rng.normal(size=(64, 6))
        yb = rng.integers(0, 2, 64).astype(float)
        w, b = rng.normal(size=6), 0.3
        gw, gb = logistic_gradient(w, b, Xb, yb)
        h, worst = 1e-5, 0.0
        for k in range(6):
            e = np.zeros(6)
            e[k] = h
            fd = (logistic_loss(w + e, b, Xb, yb) - logistic_loss(w - e, b, Xb, yb)) / (2 * h)
            worst = max(worst, abs(fd - gw[k]))
        worst = max(worst, abs((logistic_loss(w, b + h, Xb, yb) - logistic_loss(w, b - h, Xb, yb)) / (2 * h) - gb))
        assert worst <= 1e-6
        notes.append(f"max gradient gap {worst:.1e}")


@pytest.mark.slow
def test_criterion_8_end_to_end_direction():
    with criterion(8, "end-to-end direction on synth(400, 90 days, seed 1)", 300.0) as notes:
        config = ExperimentConfig(
            DataSource(synth=SynthConfig(n_sensors=400, n_days=90, seed=1)),
            embeddings=("none", "glee"),
            classifiers=("extra_trees",),
            feature_sets=("without_fe", "with_fe"),
            seed=0,
        )
        env = os.environ.pop("IBB_LAB_SEED", None)
        try:
            table = run_experiment(config)
        finally:
            if env is not None:
                os.environ["IBB_LAB_SEED"] = env
        acc = {(fs, e): table.cell(fs, e, "extra_trees").accuracy for fs in config.feature_sets for e in config.embeddings}
        notes.append(", ".join(f"{e}/{fs} {v:.4f}" for (fs, e), v in sorted(acc.items())))
        for emb in config.embeddings:
            assert acc[("with_fe", emb)] > acc[("without_fe", emb)], f"FE did not help for {emb}"
        assert acc[("without_fe", "glee")] > acc[("without_fe", "none")], "GLEE did not help without FE"
        gain = acc[("with_fe", "glee")] - acc[("without_fe", "none")]
        assert gain >= 0.02, f"gain {gain:.4f} below 0.02"
        notes.append(f"gain {100 * gain:.2f} points")


REAL_DATA = ("IBB_READINGS", "IBB_SENSORS")


@pytest.mark.skipif(not all(os.environ.get(k) for k in REAL_DATA), reason="real data files not supplied (set IBB_READINGS, IBB_SENSORS, optional IBB_EDGES)")
def test_criterion_9_real_data():
    with criterion(9, "real data (conditional)") as notes:
        source = DataSource(os.environ["IBB_READINGS"], os.environ["IBB_SENSORS"], os.environ.get("IBB_EDGES") or None)
        readings, meta, graph = source.load()
        stats = graph_stats(graph)
        assert (stats.n_nodes, stats.n_edges) == (2451, 6667), stats
        assert abs(stats.avg_degree - 2.7205) <= 0.01
        table = run_experiment(ExperimentConfig(source, embeddings=("glee",), feature_sets=("with_fe",)))
        cell = table.cell("with_fe", "glee", "extra_trees")
        notes.append(f"acc {cell.accuracy:.4f} (published 0.9653, delta {cell.accuracy - 0.9653:+.4f})")
        notes.append(f"f1 {cell.f1:.4f} (published 0.9282, delta {cell.f1 - 0.9282:+.4f}); split and hyperparameters differ")
        print(emit_report(table, "markdown"))


def test_criterion_9_skip_is_recorded():
    if not all(os.environ.get(k) for k in REAL_DATA):
        ACCEPTANCE_LINES.append("SKIP criterion 9 real data (conditional): IBB_READINGS / IBB_SENSORS not set")
