import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trafficgraph.embeddings import (
    EmbeddingMatrix,
    GraphWaveParams,
    NetMFParams,
    Node2VecParams,
    WalkCorpus,
    export_embedding_csv,
    gaussian_affinity,
    glee,
    glee_from_points,
    graphwave,
    netmf,
    netmf_factors,
    netmf_matrix,
    node2vec,
    node2vec_embed,
    node2vec_walks,
    read_embedding_csv,
    transition_probabilities,
)
from trafficgraph.errors import DimOutOfRange, EmptyCorpus, NoEdges
from trafficgraph.graph import from_index_edges, laplacian
from trafficgraph.oracles import check_walk_law, cycle_graph, path_graph, star_graph

from conftest import graphs

SMALL_N2V = Node2VecParams(walk_length=10, walks_per_node=4, dim=8, epochs=1)


def k3():
    return from_index_edges(3, [(0, 1), (1, 2), (0, 2)])


# GLEE


def test_glee_single_edge():
    emb = glee(from_index_edges(2, [(0, 1)]), 1)
    assert np.allclose(emb.rows, [[1.0], [-1.0]], atol=1e-12)


def test_glee_triangle_gram():
    y = glee(k3(), 2).rows
    assert np.abs(y.T @ y - np.diag([3.0, 3.0])).max() <= 1e-8


@settings(max_examples=40, deadline=None)
@given(graphs(max_nodes=20), st.data())
def test_glee_geometry(g, data):
    n = g.n_nodes
    d = data.draw(st.integers(1, n))
    lap = laplacian(g)
    y = glee(g, d).rows
    top = np.sort(np.linalg.eigvalsh(lap))[::-1][:d]
    gram = y.T @ y
    assert np.abs(gram - np.diag(np.diag(gram))).max() <= 1e-8
    assert np.allclose(np.diag(gram), np.clip(top, 0, None), atol=1e-8)
    # with Y^T Y = diag(lam) the quadratic form picks up lam once more
    assert abs(np.trace(y.T @ lap @ y) - np.sum(top**2)) <= 1e-8 * max(1.0, np.sum(top**2))
    full = glee(g, n).rows
    assert np.abs(full @ full.T - lap).max() <= 1e-8


def test_glee_dim_checks():
    with pytest.raises(DimOutOfRange):
        glee(k3(), 0)
    with pytest.raises(DimOutOfRange):
        glee(k3(), 4)
    with pytest.raises(DimOutOfRange):
        glee(k3(), 3, variant="le")


def test_glee_le_variant_uses_smallest_nontrivial():
    g = path_graph(6)
    y = glee(g, 2, variant="le").rows
    vecs = np.linalg.eigh(laplacian(g))[1][:, 1:3]
    assert np.allclose(np.abs(y), np.abs(vecs), atol=1e-10)
    assert np.abs(y.T @ y - np.eye(2)).max() <= 1e-10


def test_gaussian_affinity_values():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    a = gaussian_affinity(pts, 1.0)
    assert a[0, 0] == 0.0
    assert math.isclose(a[0, 1], math.exp(-0.5), rel_tol=1e-12)
    assert math.isclose(a[1, 2], math.exp(-2.5), rel_tol=1e-12)
    assert np.array_equal(a, a.T)
    with pytest.raises(ValueError):
        gaussian_affinity(pts, 0.0)


def test_glee_from_points_reconstructs_kernel_laplacian():
    pts = np.random.default_rng(0).normal(size=(12, 3))
    a = gaussian_affinity(pts, 1.5)
    lap = np.diag(a.sum(axis=1)) - a
    y = glee_from_points(pts, 12, 1.5)
    assert np.abs(y @ y.T - lap).max() <= 1e-8


# Node2Vec walks


def test_walk_counts_and_edges():
    g = from_index_edges(5, [(0, 1), (1, 2), (2, 3)])  # node 4 isolated
    params = Node2VecParams(walk_length=7, walks_per_node=3, p=0.5, q=2.0)
    corpus = node2vec_walks(g, params)
    assert len(corpus) == 15
    walks = list(corpus)
    assert sum(1 for w in walks if list(w) == [4]) == 3
    for w in walks:
        if w[0] != 4:
            assert len(w) == 7
        for a, b in zip(w, w[1:]):
            assert g.has_edge(int(a), int(b))


def test_walks_deterministic_and_seed_sensitive():
    g = cycle_graph(7)
    a = node2vec_walks(g, Node2VecParams(seed=3))
    b = node2vec_walks(g, Node2VecParams(seed=3))
    c = node2vec_walks(g, Node2VecParams(seed=4))
    assert np.array_equal(a.walks, b.walks)
    assert not np.array_equal(a.walks, c.walks)


def test_transition_law_examples():
    g = path_graph(3)
    law = transition_probabilities(g, 0, 1, p=0.5, q=2.0)
    assert math.isclose(law[0], 0.8) and math.isclose(law[2], 0.2)
    law = transition_probabilities(k3(), 0, 1, p=1.0, q=1e9)
    assert math.isclose(law[0], 0.5) and math.isclose(law[2], 0.5)
    law = transition_probabilities(star_graph(4), 1, 0, p=1.0, q=1.0)
    assert all(math.isclose(v, 0.25) for v in law.values())


@pytest.mark.parametrize(
    "p,q,graph,name",
    [(0.5, 2.0, path_graph(3), "path3"), (1.0, 1e9, k3(), "triangle"), (0.25, 4.0, star_graph(4), "star4")],
)
def test_walk_frequencies_match_law(p, q, graph, name):
    result = check_walk_law(p, q, graph, name)
    assert result.passed, result.detail


def test_empty_graph_walks_rejected():
    with pytest.raises(EmptyCorpus):
        node2vec_walks(from_index_edges(0, []), SMALL_N2V)


# Node2Vec training


def test_two_cliques_separate():
    edges = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    edges += [(i + 5, j + 5) for i, j in edges]
    g = from_index_edges(10, edges)
    emb = node2vec(g, Node2VecParams(dim=16, walks_per_node=20, walk_length=20, epochs=5, seed=1)).rows
    unit = emb / np.linalg.norm(emb, axis=1, keepdims=True)
    cos = unit @ unit.T
    same = np.add.outer(np.arange(10) // 5, np.zeros(10)) == np.add.outer(np.zeros(10), np.arange(10) // 5)
    off = ~np.eye(10, dtype=bool)
    assert cos[same & off].mean() > cos[~same].mean()


def test_singleton_corpus_keeps_initialization():
    g = from_index_edges(4, [])
    params = Node2VecParams(dim=8, epochs=3, seed=5)
    emb = node2vec(g, params).rows
    assert np.abs(emb).max() <= 0.5 / 8
    untrained = node2vec_embed(node2vec_walks(g, params), g, Node2VecParams(dim=8, epochs=0, seed=5)).rows
    assert np.array_equal(emb, untrained)


def test_node2vec_deterministic():
    g = cycle_graph(8)
    assert node2vec(g, SMALL_N2V) == node2vec(g, SMALL_N2V)
    assert np.all(np.isfinite(node2vec(g, SMALL_N2V).rows))


def test_empty_corpus():
    corpus = WalkCorpus(np.empty((0, 5), dtype=np.int64), np.empty(0, dtype=np.int64), 0)
    with pytest.raises(EmptyCorpus):
        node2vec_embed(corpus, cycle_graph(3), SMALL_N2V)


# NetMF


def test_netmf_single_edge():
    m = netmf_matrix(from_index_edges(2, [(0, 1)]), window=1, negatives=1)
    assert np.allclose(m, [[0.0, math.log(2)], [math.log(2), 0.0]], atol=1e-14)


def test_netmf_errors():
    with pytest.raises(NoEdges):
        netmf(from_index_edges(3, []), NetMFParams(dim=2))
    with pytest.raises(DimOutOfRange):
        netmf(k3(), NetMFParams(dim=4))


@settings(max_examples=30, deadline=None)
@given(graphs(min_nodes=2, max_nodes=30, connected=True), st.data())
def test_netmf_factorization_properties(g, data):
    d = data.draw(st.integers(1, g.n_nodes))
    params = NetMFParams(window=data.draw(st.integers(1, 5)), dim=d)
    m, svd = netmf_factors(g, params)
    assert m.min() >= 0.0
    sigma = np.linalg.svd(m, compute_uv=False)
    err = np.linalg.norm(m - svd.reconstruct())
    assert abs(err - math.sqrt(np.sum(sigma[d:] ** 2))) <= 1e-8 * max(1.0, np.linalg.norm(m))
    if d == g.n_nodes:
        assert err <= 1e-8
    rows = netmf(g, params).rows
    assert rows.shape == (g.n_nodes, d)


# GraphWave


def test_graphwave_zero_point():
    emb = graphwave(cycle_graph(6), GraphWaveParams(points=(0.0, 1.0))).rows
    assert np.allclose(emb[:, 0], 1.0) and np.allclose(emb[:, 1], 0.0)


def test_graphwave_star_leaves_identical():
    rows = graphwave(star_graph(5)).rows
    assert rows.shape == (6, 100)
    assert np.abs(rows[1:] - rows[1]).max() <= 1e-8


def test_graphwave_empty_graph_closed_form():
    n = 4
    t = np.array([0.5, 1.0, 3.0])
    rows = graphwave(from_index_edges(n, []), GraphWaveParams(points=tuple(t))).rows
    phi = ((n - 1) + np.exp(1j * t)) / n
    expected = np.column_stack([phi.real, phi.imag]).ravel()
    assert np.allclose(rows, np.tile(expected, (n, 1)), atol=1e-14)


def test_graphwave_default_points():
    assert np.allclose(GraphWaveParams().sample_points(), np.arange(1, 51) * 2.0)


@settings(max_examples=30, deadline=None)
@given(graphs(max_nodes=12), st.randoms(use_true_random=False))
def test_graphwave_relabel_invariance(g, rnd):
    perm = list(range(g.n_nodes))
    rnd.shuffle(perm)
    edges = [(perm[i], perm[int(j)]) for i in range(g.n_nodes) for j in g.neighbors(i) if i < j]
    h = from_index_edges(g.n_nodes, edges)
    params = GraphWaveParams(n_points=6, t_max=10)
    a, b = graphwave(g, params).rows, graphwave(h, params).rows
    assert np.abs(b[perm] - a).max() <= 1e-8
    mod2 = a[:, 0::2] ** 2 + a[:, 1::2] ** 2
    assert mod2.max() <= 1.0 + 1e-12


# shared contracts


@pytest.mark.parametrize(
    "make",
    [
        lambda g: glee(g, 3),
        lambda g: node2vec(g, SMALL_N2V),
        lambda g: netmf(g, NetMFParams(dim=3)),
        lambda g: graphwave(g, GraphWaveParams(n_points=4)),
    ],
)
def test_all_methods_deterministic(make):
    g = cycle_graph(9)
    a, b = make(g), make(g)
    assert a == b
    assert a.n_nodes == 9


def test_embedding_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        EmbeddingMatrix("glee", np.array([[np.nan]]), "{}")


def test_csv_export_round_trip(tmp_path):
    emb = glee(cycle_graph(5), 3)
    path = tmp_path / "emb.csv"
    export_embedding_csv(emb, path, ["a", "b", "c", "d", "e"])
    assert path.read_text().splitlines()[0] == "node_id,e0,e1,e2"
    ids, rows = read_embedding_csv(path)
    assert ids == ["a", "b", "c", "d", "e"]
    assert np.allclose(rows, emb.rows, rtol=1e-11, atol=1e-12)
