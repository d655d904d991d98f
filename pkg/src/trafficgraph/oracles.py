"""Brute-force cross-checks of the numerical kernels.

Each check recomputes a result by an independent, slower route and compares
it with the production code path. They back the ``oracle`` CLI command and
are reused by the test suite.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .classifiers.metrics import auroc
from .embeddings.glee import glee_from_eig
from .embeddings.node2vec import Node2VecParams, node2vec_walks
from .graph import Graph, from_index_edges, laplacian
from .spectral import eigh


@dataclass(frozen=True)
class OracleResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


# --- graph generators --------------------------------------------------------


def random_connected_graph(n: int, rng: np.random.Generator, extra_edge_prob: float = 0.2) -> Graph:
    """Random spanning tree plus independent extra edges."""
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        a, b = int(order[k]), int(order[rng.integers(0, k)])
        edges.add((min(a, b), max(a, b)))
    iu, ju = np.triu_indices(n, 1)
    extra = rng.random(len(iu)) < extra_edge_prob
    edges.update(zip(iu[extra].tolist(), ju[extra].tolist()))
    return from_index_edges(n, edges)


def path_graph(n: int) -> Graph:
    return from_index_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return from_index_edges(n, [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)])


def star_graph(n_leaves: int) -> Graph:
    return from_index_edges(n_leaves + 1, [(0, i) for i in range(1, n_leaves + 1)])


# --- characteristic polynomial ----------------------------------------------


def charpoly_exact(matrix: np.ndarray) -> list[Fraction]:
    """Coefficients of det(xI - M), highest degree first (Faddeev-LeVerrier,
    exact rational arithmetic; intended for small integer matrices)."""
    a = [[Fraction(int(round(x))) for x in row] for row in np.asarray(matrix)]
    n = len(a)
    coeffs = [Fraction(1)]
    m = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I ; c_k = -tr(A M_k) / k
        am = [[sum(a[i][t] * m[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        m = [[am[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        am = [[sum(a[i][t] * m[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(am[i][i] for i in range(n)) / k)
    return coeffs


def _poly_trim(a: list[Fraction]) -> list[Fraction]:
    while len(a) > 1 and a[0] == 0:
        a = a[1:]
    return a


def _poly_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a = list(a)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        f = a[0] / b[0]
        k = len(a) - len(b)
        q[len(q) - 1 - k] = f
        for i, c in enumerate(b):
            a[i] -= f * c
        a = _poly_trim(a[1:]) if len(a) > 1 else [Fraction(0)]
    return q, a


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    while any(b):
        a, b = b, _poly_divmod(a, b)[1]
    return [c / a[0] for c in a]


def _derivative(a: list[Fraction]) -> list[Fraction]:
    n = len(a) - 1
    return [c * (n - i) for i, c in enumerate(a[:-1])] or [Fraction(0)]


def squarefree_factors(a: list[Fraction]) -> list[tuple[list[Fraction], int]]:
    """Yun's algorithm: ``a = prod f_k ** k`` with each ``f_k`` square-free."""
    out = []
    g = _poly_gcd(a, _derivative(a))
    b = _poly_divmod(a, g)[0]
    c = _poly_divmod(_derivative(a), g)[0]
    d = [x - y for x, y in zip(c, [Fraction(0)] * (len(c) - len(_derivative(b))) + _derivative(b))]
    k = 1
    while len(b) > 1:
        h = _poly_gcd(b, _poly_trim(d))
        b = _poly_divmod(b, h)[0]
        c = _poly_divmod(_poly_trim(d), h)[0]
        db = _derivative(b)
        c = [Fraction(0)] * (len(db) - len(c)) + c
        d = [x - y for x, y in zip(c, [Fraction(0)] * (len(c) - len(db)) + db)]
        if len(h) > 1:
            out.append((h, k))
        k += 1
    return out


def charpoly_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Roots of the exact characteristic polynomial, with multiplicity.

    Repeated roots are split off exactly first so each numerical root
    finding runs on a polynomial with simple roots.
    """
    roots = []
    for factor, mult in squarefree_factors(charpoly_exact(matrix)):
        r = np.roots([float(c) for c in factor]).real
        roots.extend(np.repeat(r, mult))
    return np.sort(np.asarray(roots))


# --- individual oracles -------------------------------------------------------


def check_eigen_reconstruction(n_graphs: int = 20, max_n: int = 30, seed: int = 0, tol: float = 1e-8) -> OracleResult:
    """V diag(lam) V^T == L, V orthonormal, both eigen backends agree, and
    small spectra match characteristic-polynomial roots."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(n_graphs):
        n = int(rng.integers(2, max_n + 1)) if k >= 3 else k + 2
        lap = laplacian(random_connected_graph(n, rng))
        for backend in ("lapack", "ql"):
            e = eigh(lap, backend=backend)
            v, lam = e.eigenvectors, e.eigenvalues
            worst = max(worst, np.abs(v * lam @ v.T - lap).max(), np.abs(v.T @ v - np.eye(n)).max())
        worst = max(worst, np.abs(eigh(lap, "lapack").eigenvalues - eigh(lap, "ql").eigenvalues).max())
        if n <= 4:
            worst = max(worst, np.abs(charpoly_eigenvalues(lap) - eigh(lap).eigenvalues).max())
    return OracleResult("eigen_reconstruction", worst <= tol, f"max error {worst:.3e} (tol {tol:g})")


def check_glee_exactness(n_graphs: int = 20, max_n: int = 30, seed: int = 1, tol: float = 1e-8) -> OracleResult:
    """Y Y^T == L at full dimension; Y^T Y == diag(top eigenvalues) otherwise."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_graphs):
        n = int(rng.integers(2, max_n + 1))
        lap = laplacian(random_connected_graph(n, rng))
        eig = eigh(lap)
        y = glee_from_eig(eig, n)
        worst = max(worst, np.abs(y @ y.T - lap).max())
        top = np.sort(eig.eigenvalues)[::-1]
        for d in range(1, min(5, n) + 1):
            y = glee_from_eig(eig, d)
            gram = y.T @ y
            worst = max(worst, np.abs(gram - np.diag(top[:d])).max())
            # scaled columns: tr(Y^T L Y) is the sum of the squared top eigenvalues
            worst = max(worst, abs(np.trace(y.T @ lap @ y) - (top[:d] ** 2).sum()))
    return OracleResult("glee_exactness", worst <= tol, f"max error {worst:.3e} (tol {tol:g})")


def shortest_path_lengths(g: Graph, source: int) -> np.ndarray:
    dist = np.full(g.n_nodes, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(int(v))
    return dist


def expected_transitions(g: Graph, p: float, q: float) -> dict[tuple[int, int], dict[int, float]]:
    """Second-order law for every (previous, current) pair from shortest-path
    distances: weight 1/p at distance 0, 1 at distance 1, 1/q at distance 2."""
    alpha = {0: 1.0 / p, 1: 1.0, 2: 1.0 / q}
    law = {}
    for t in range(g.n_nodes):
        dist = shortest_path_lengths(g, t)
        for v in g.neighbors(t):
            nbrs = [int(x) for x in g.neighbors(v)]
            w = np.array([alpha[int(dist[x])] for x in nbrs])
            law[(t, int(v))] = dict(zip(nbrs, w / w.sum()))
    return law


def empirical_transitions(g: Graph, p: float, q: float, min_steps: int = 1_000_000, seed: int = 0):
    """Observed (previous, current) -> next frequencies and the step count."""
    walk_length = 1000
    per_node = -(-min_steps // (g.n_nodes * (walk_length - 2))) + 1
    params = Node2VecParams(p=p, q=q, walk_length=walk_length, walks_per_node=per_node, seed=seed)
    corpus = node2vec_walks(g, params)
    n = g.n_nodes
    w = corpus.walks
    valid = (w[:, :-2] >= 0) & (w[:, 1:-1] >= 0) & (w[:, 2:] >= 0)
    triples = (w[:, :-2] * n + w[:, 1:-1]) * n + w[:, 2:]
    counts = np.bincount(triples[valid].ravel(), minlength=n**3).reshape(n, n, n)
    return counts, int(valid.sum())


def check_walk_law(p: float, q: float, graph: Graph, name: str, min_steps: int = 1_000_000, tol: float = 0.01, seed: int = 0) -> OracleResult:
    counts, steps = empirical_transitions(graph, p, q, min_steps, seed)
    worst = 0.0
    for (t, v), law in expected_transitions(graph, p, q).items():
        total = counts[t, v].sum()
        if total == 0:
            continue
        for x in range(graph.n_nodes):
            worst = max(worst, abs(counts[t, v, x] / total - law.get(x, 0.0)))
    return OracleResult(f"walk_law[{name},p={p:g},q={q:g}]", worst <= tol and steps >= min_steps, f"{steps} steps, max |freq - law| {worst:.4f} (tol {tol:g})")


def pairwise_auroc(scores, labels) -> float | None:
    """Fraction of positive-negative pairs ordered correctly, ties counting half."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    pos, neg = s[y], s[~y]
    if len(pos) == 0 or len(neg) == 0:
        return None
    diff = pos[:, None] - neg[None, :]
    return float(((diff > 0).sum() + 0.5 * (diff == 0).sum()) / diff.size)


def check_auroc(n_instances: int = 1000, max_points: int = 200, seed: int = 0) -> OracleResult:
    rng = np.random.default_rng(seed)
    mismatches = 0
    checked = 0
    for _ in range(n_instances):
        n = int(rng.integers(2, max_points + 1))
        # coarse grid so ties are frequent
        scores = rng.integers(0, int(rng.integers(2, 20)), n) / 10.0
        labels = rng.integers(0, 2, n)
        a, b = auroc(scores, labels), pairwise_auroc(scores, labels)
        if a is None or b is None:
            mismatches += (a is None) != (b is None)
            continue
        checked += 1
        # both are the correctly rounded quotient of the same exact numerator
        # (a multiple of 0.5) by P*N, so they must agree bit for bit
        mismatches += a != b
    return OracleResult("auroc_pairwise", mismatches == 0, f"{n_instances} instances ({checked} with both classes), {mismatches} mismatches")


def run_all(quick: bool = False) -> list[OracleResult]:
    steps = 200_000 if quick else 1_000_000
    results = [check_eigen_reconstruction(), check_glee_exactness()]
    for name, g in (("path3", path_graph(3)), ("cycle4", cycle_graph(4))):
        for p, q in ((1.0, 1.0), (0.5, 2.0), (4.0, 0.25)):
            results.append(check_walk_law(p, q, g, name, min_steps=steps))
    results.append(check_auroc(200 if quick else 1000))
    return results
