"""Single-sample reference methods: k-means, random projection, PCA projection."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset, RngHandle


@dataclass(frozen=True, eq=False)
class KMeansResult:
    centers: np.ndarray
    assignments: np.ndarray
    inertia: float
    iterations_run: int
    inertia_trace: tuple = ()


def _sq_dists(X, C):
    d = (X * X).sum(1)[:, None] - 2 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _nearest(X, C):
    # argmin returns the first minimum, so ties go to the lowest index
    D = _sq_dists(X, C)
    a = np.argmin(D, axis=1)
    return a, D[np.arange(len(X)), a]


def _weighted_inertia(w, mind):
    return float(w @ mind)


def _dsq_seed(X, w, k, gen):
    n = len(X)
    first = gen.choice(n, p=w / w.sum())
    C = [X[first]]
    mind = _sq_dists(X, X[first][None, :])[:, 0]
    for _ in range(1, k):
        p = w * mind
        if p.sum() <= 0:
            # remaining points coincide with chosen centres
            idx = gen.choice(n, p=w / w.sum())
        else:
            idx = gen.choice(n, p=p / p.sum())
        C.append(X[idx])
        mind = np.minimum(mind, _sq_dists(X, X[idx][None, :])[:, 0])
    return np.array(C)


def _lloyd(X, w, C, max_iter):
    assign, mind = _nearest(X, C)
    trace = [_weighted_inertia(w, mind)]
    it = 0
    for it in range(1, max_iter + 1):
        C = C.copy()
        for j in range(len(C)):
            m = assign == j
            if m.any() and w[m].sum() > 0:
                C[j] = (w[m] @ X[m]) / w[m].sum()
            else:
                # reseed an empty cluster at the point farthest from its centre
                far = int(np.argmax(mind))
                C[j] = X[far]
                mind[far] = 0.0
        new_assign, mind = _nearest(X, C)
        trace.append(_weighted_inertia(w, mind))
        if np.array_equal(new_assign, assign):
            assign = new_assign
            break
        assign = new_assign
    return C, assign, trace[-1], it, tuple(trace)


def kmeans(d: Dataset, k: int, restarts: int = 10, max_iter: int = 300,
           rng: Optional[RngHandle] = None) -> KMeansResult:
    """Lloyd's algorithm from ``restarts`` D^2 seedings; best inertia wins."""
    X = d.points
    w = d.weights
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    distinct = len(np.unique(X, axis=0))
    if not 1 <= k <= distinct:
        raise ValueError(f"k={k} but the data has {distinct} distinct points")
    rng = rng if rng is not None else RngHandle(0)
    best = None
    for r in range(restarts):
        gen = rng.child(r).generator()
        C0 = _dsq_seed(X, w, k, gen)
        C, assign, inertia, its, trace = _lloyd(X, w, C0, max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(C, assign, inertia, its, trace)
    return best


def gaussian_matrix(n: int, target_dim: int, rng: RngHandle) -> np.ndarray:
    return rng.generator().standard_normal((n, target_dim)) / np.sqrt(target_dim)


def random_projection(d: Dataset, target_dim: int, rng: Optional[RngHandle] = None,
                      matrix: Optional[np.ndarray] = None) -> Dataset:
    """Multiply by an n x target_dim Gaussian matrix scaled by 1/sqrt(target_dim).

    ``matrix`` overrides the random draw (used to test the identity case).
    """
    n = d.dim
    if not 1 <= target_dim <= n:
        raise ValueError(f"target_dim must lie in [1, {n}]")
    if matrix is None:
        matrix = gaussian_matrix(n, target_dim, rng if rng is not None else RngHandle(0))
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (n, target_dim):
        raise ValueError(f"projection matrix has shape {matrix.shape}, expected {(n, target_dim)}")
    return d.with_points(d.points @ matrix)


@dataclass(frozen=True, eq=False)
class PCAProjection:
    data: Dataset
    components: np.ndarray   # (k, n)
    eigenvalues: np.ndarray  # retained, descending
    mean: np.ndarray
    truncated: bool          # fewer dims than requested because of rank


def _canonical_signs(V):
    for r in V:
        nz = np.flatnonzero(np.abs(r) > 1e-12)
        if len(nz) and r[nz[0]] < 0:
            r *= -1
    return V


def principal_directions(X: np.ndarray, w: Optional[np.ndarray] = None):
    """Eigenvalues (descending) and unit directions of the weighted covariance."""
    N, n = X.shape
    w = np.ones(N) if w is None else np.asarray(w, dtype=float)
    mu = (w @ X) / w.sum()
    Xc = X - mu
    W = w / w.sum()
    if n <= N:
        cov = (Xc * W[:, None]).T @ Xc
        vals, vecs = np.linalg.eigh(cov)
        order = np.argsort(vals)[::-1]
        vals, V = vals[order], vecs[:, order].T
    else:
        # Gram route: eigenvectors of sqrt(W) Xc Xc^T sqrt(W)
        Y = Xc * np.sqrt(W)[:, None]
        vals, U = np.linalg.eigh(Y @ Y.T)
        order = np.argsort(vals)[::-1]
        vals, U = vals[order], U[:, order]
        keep = vals > 0
        V = np.zeros((len(vals), n))
        V[keep] = (Y.T @ U[:, keep] / np.sqrt(vals[keep])).T
    vals = np.clip(vals, 0.0, None)
    return vals, _canonical_signs(V.copy()), mu


def fit_pca(d: Dataset, target_dim: int) -> PCAProjection:
    n = d.dim
    if not 1 <= target_dim <= n:
        raise ValueError(f"target_dim must lie in [1, {n}]")
    vals, V, mu = principal_directions(d.points, d.weights)
    tol = max(vals[0], 0.0) * max(d.points.shape) * np.finfo(float).eps if len(vals) else 0.0
    rank = int(np.sum(vals > tol))
    k = target_dim
    truncated = False
    if k > rank:
        warnings.warn(f"requested {k} principal directions but data rank is {rank}",
                      RuntimeWarning, stacklevel=2)
        k, truncated = max(rank, 1), True
    comps = V[:k]
    return PCAProjection(d.with_points((d.points - mu) @ comps.T), comps, vals[:k], mu, truncated)


def pca_projection(d: Dataset, target_dim: int) -> Dataset:
    """Centre and project onto the top ``target_dim`` principal directions."""
    return fit_pca(d, target_dim).data
