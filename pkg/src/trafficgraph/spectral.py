"""Dense symmetric eigensolvers, truncated SVD and heat-kernel wavelets.

Two eigen backends are available. ``"lapack"`` (default) defers to
``numpy.linalg.eigh``; ``"ql"`` is a self-contained Householder
tridiagonalisation followed by implicit-shift QL iterations, used to
cross-check the LAPACK path. Both return eigenvalues in ascending order with
eigenvector signs normalised so that the first component whose magnitude
exceeds ``SIGN_EPS`` is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import ConvergenceFailure, IndexOutOfRange, NotSymmetric, RankOutOfRange

SYMMETRY_TOL = 1e-10
SIGN_EPS = 1e-12
QL_MAX_ITER = 60
QL_TOL = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns


@dataclass(frozen=True)
class SVDResult:
    left_factors: np.ndarray
    singular_values: np.ndarray  # descending
    right_factors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left_factors * self.singular_values) @ self.right_factors.T


def _fix_signs(vectors: np.ndarray, *others: np.ndarray) -> None:
    """Flip columns in place so the first significant entry is positive."""
    if vectors.size == 0:
        return
    significant = np.abs(vectors) > SIGN_EPS
    first = np.argmax(significant, axis=0)
    lead = vectors[first, np.arange(vectors.shape[1])]
    flip = (lead < 0) & significant.any(axis=0)
    vectors[:, flip] *= -1
    for o in others:
        o[:, flip] *= -1


@numba.njit(cache=True)
def _tred2(v, d, e):
    # Householder reduction of the symmetric matrix held in v to tridiagonal
    # form; v is overwritten with the accumulated orthogonal transform.
    n = v.shape[0]
    for j in range(n):
        d[j] = v[n - 1, j]
    for i in range(n - 1, 0, -1):
        scale = 0.0
        h = 0.0
        for k in range(i):
            scale += abs(d[k])
        if scale == 0.0:
            e[i] = d[i - 1]
            for j in range(i):
                d[j] = v[i - 1, j]
                v[i, j] = 0.0
                v[j, i] = 0.0
        else:
            for k in range(i):
                d[k] /= scale
                h += d[k] * d[k]
            f = d[i - 1]
            g = np.sqrt(h)
            if f > 0:
                g = -g
            e[i] = scale * g
            h = h - f * g
            d[i - 1] = f - g
            for j in range(i):
                e[j] = 0.0
            for j in range(i):
                f = d[j]
                v[j, i] = f
                g = e[j] + v[j, j] * f
                for k in range(j + 1, i):
                    g += v[k, j] * d[k]
                    e[k] += v[k, j] * f
                e[j] = g
            f = 0.0
            for j in range(i):
                e[j] /= h
                f += e[j] * d[j]
            hh = f / (h + h)
            for j in range(i):
                e[j] -= hh * d[j]
            for j in range(i):
                f = d[j]
                g = e[j]
                for k in range(j, i):
                    v[k, j] -= f * e[k] + g * d[k]
                d[j] = v[i - 1, j]
                v[i, j] = 0.0
        d[i] = h
    for i in range(n - 1):
        v[n - 1, i] = v[i, i]
        v[i, i] = 1.0
        h = d[i + 1]
        if h != 0.0:
            for k in range(i + 1):
                d[k] = v[k, i + 1] / h
            for j in range(i + 1):
                g = 0.0
                for k in range(i + 1):
                    g += v[k, i + 1] * v[k, j]
                for k in range(i + 1):
                    v[k, j] -= g * d[k]
        for k in range(i + 1):
            v[k, i + 1] = 0.0
    for j in range(n):
        d[j] = v[n - 1, j]
        v[n - 1, j] = 0.0
    v[n - 1, n - 1] = 1.0
    e[0] = 0.0


@numba.njit(cache=True)
def _tql2(v, d, e, tol, max_iter):
    # Implicit-shift QL on the tridiagonal (d, e); returns False when an
    # eigenvalue needs more than max_iter sweeps.
    n = v.shape[0]
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1:
            if abs(e[m]) <= tol * tst1:
                break
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_iter:
                    return False
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = np.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = np.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(n):
                        h = v[k, i + 1]
                        v[k, i + 1] = s * v[k, i] + c * h
                        v[k, i] = c * v[k, i] - s * h
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if not abs(e[l]) > tol * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0
    return True


def _eigh_ql(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = a.shape[0]
    v = np.array(a, dtype=np.float64, order="C", copy=True)
    d = np.zeros(n)
    e = np.zeros(n)
    _tred2(v, d, e)
    if not _tql2(v, d, e, QL_TOL, QL_MAX_ITER):
        raise ConvergenceFailure(f"QL iteration exceeded {QL_MAX_ITER} sweeps for one eigenvalue")
    order = np.argsort(d, kind="stable")
    return d[order], v[:, order]


def eigh(matrix: np.ndarray, backend: str = "lapack") -> EigenDecomposition:
    """Full eigendecomposition of a real symmetric matrix.

    Raises :class:`NotSymmetric` if any entry differs from its transpose by
    more than ``SYMMETRY_TOL``.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise NotSymmetric("matrix is not symmetric within 1e-10")
    if a.shape[0] == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0)))
    sym = 0.5 * (a + a.T)
    if backend == "lapack":
        vals, vecs = np.linalg.eigh(sym)
        vecs = np.ascontiguousarray(vecs)
    elif backend == "ql":
        vals, vecs = _eigh_ql(sym)
    else:
        raise ValueError(f"unknown eigen backend {backend!r}")
    _fix_signs(vecs)
    return EigenDecomposition(vals, vecs)


def truncated_svd(matrix: np.ndarray, d: int) -> SVDResult:
    """Best rank-``d`` factorisation (Eckart-Young) of a dense matrix."""
    m = np.asarray(matrix, dtype=np.float64)
    if not 1 <= d <= min(m.shape):
        raise RankOutOfRange(f"rank {d} outside [1, {min(m.shape)}]")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    u = np.ascontiguousarray(u[:, :d])
    v = np.ascontiguousarray(vt[:d].T)
    _fix_signs(u, v)
    return SVDResult(u, s[:d].copy(), v)


def heat_filter(eigenvalues: np.ndarray, s: float) -> np.ndarray:
    return np.exp(-s * eigenvalues)


def heat_kernel_column(eig: EigenDecomposition, s: float, a: int) -> np.ndarray:
    """Heat wavelet centred on node ``a``: ``U diag(exp(-s*lam)) U^T delta_a``."""
    n = eig.eigenvalues.shape[0]
    if not 0 <= a < n:
        raise IndexOutOfRange(f"node index {a} outside [0, {n})")
    if s <= 0:
        raise ValueError("scale must be positive")
    u = eig.eigenvectors
    return u @ (heat_filter(eig.eigenvalues, s) * u[a])


def heat_kernel_matrix(eig: EigenDecomposition, s: float) -> np.ndarray:
    """All wavelets at once; column ``a`` equals ``heat_kernel_column(eig, s, a)``."""
    if s <= 0:
        raise ValueError("scale must be positive")
    u = eig.eigenvectors
    return (u * heat_filter(eig.eigenvalues, s)) @ u.T
