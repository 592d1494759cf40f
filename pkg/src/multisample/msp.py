"""Multi-sample projection: project onto the affine span of the sample means."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, weighted_mean


class RankZeroBasisError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProjectionBasis:
    raw_vectors: np.ndarray        # (m-1, n), row j = E_j - E_{j+1}
    orthonormal_basis: np.ndarray  # (d, n)
    singular_values: np.ndarray    # all singular values of raw_vectors, descending
    anchor: np.ndarray             # E_m, affine origin
    effective_rank: int
    residual_norms: np.ndarray     # per raw vector, norm outside the retained span

    @property
    def ambient_dim(self) -> int:
        return self.anchor.shape[0]

    @property
    def degenerate(self) -> bool:
        return self.effective_rank == 0

    def coordinates(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.ambient_dim:
            raise ValueError(f"points have dimension {X.shape[1]}, basis expects {self.ambient_dim}")
        return (X - self.anchor) @ self.orthonormal_basis.T

    def reconstruct(self, coords: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        return self.anchor + coords @ self.orthonormal_basis

    def to_json(self) -> str:
        return json.dumps({
            "raw_vectors": self.raw_vectors.tolist(),
            "orthonormal_basis": self.orthonormal_basis.tolist(),
            "singular_values": self.singular_values.tolist(),
            "anchor": self.anchor.tolist(),
            "effective_rank": self.effective_rank,
            "residual_norms": self.residual_norms.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "ProjectionBasis":
        d = json.loads(text)
        n = len(d["anchor"])
        basis = np.array(d["orthonormal_basis"], dtype=float).reshape(-1, n)
        return cls(
            raw_vectors=np.array(d["raw_vectors"], dtype=float).reshape(-1, n),
            orthonormal_basis=basis,
            singular_values=np.array(d["singular_values"], dtype=float),
            anchor=np.array(d["anchor"], dtype=float),
            effective_rank=int(d["effective_rank"]),
            residual_norms=np.array(d["residual_norms"], dtype=float),
        )


@dataclass(frozen=True)
class MSPBoundParams:
    sigma_max_sq: float
    coeff_bound: float
    dims: int
    sample_sizes: tuple

    def __post_init__(self):
        sizes = tuple(self.sample_sizes)
        object.__setattr__(self, "sample_sizes", sizes)
        if not (self.sigma_max_sq > 0 and self.coeff_bound > 0 and self.dims > 0):
            raise ValueError("sigma_max_sq, coeff_bound and dims must be positive")
        if not sizes or any(s <= 0 for s in sizes):
            raise ValueError("sample sizes must be positive")


@dataclass(frozen=True)
class MSPBounds:
    mean_deviation: float       # P[sup_j |E_j - Ē_j| > eps]
    distance_distortion: float  # P[max pairwise distance change > eps]


def estimate_means(samples: Sequence[Dataset]) -> list:
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    dims = {s.dim for s in samples}
    if len(dims) != 1:
        raise ValueError(f"samples have mismatched dimensions {sorted(dims)}")
    for s in samples:
        if len(s) == 0:
            raise ValueError(f"sample {s.sample_id} is empty")
    return [weighted_mean(s) for s in samples]


def _sign_fix(rows: np.ndarray) -> np.ndarray:
    # largest-magnitude coordinate positive, for reproducible bases
    out = rows.copy()
    for r in out:
        k = int(np.argmax(np.abs(r)))
        if r[k] < 0:
            r *= -1
    return out


def build_basis(means: Sequence[np.ndarray], rank_tol: float = 1e-6,
                max_rank: Optional[int] = None) -> ProjectionBasis:
    """Difference vectors of consecutive means plus an orthonormal frame.

    Singular values at or below ``rank_tol * s_max`` are dropped, as is
    anything past ``max_rank``. Identical means yield a rank-0 basis and a
    warning rather than an exception.
    """
    if len(means) < 2:
        raise ValueError("need at least two means")
    if not 0 < rank_tol < 1:
        raise ValueError("rank_tol must lie in (0, 1)")
    E = np.vstack([np.asarray(m, dtype=float).reshape(-1) for m in means])
    V = E[:-1] - E[1:]
    _, s, Wt = np.linalg.svd(V, full_matrices=False)
    if s[0] > 0:
        rank = int(np.sum(s > rank_tol * s[0]))
    else:
        rank = 0
    if max_rank is not None:
        rank = min(rank, int(max_rank))
    B = _sign_fix(Wt[:rank]) if rank else np.zeros((0, E.shape[1]))
    residual = np.linalg.norm(V - (V @ B.T) @ B, axis=1)
    if rank == 0:
        warnings.warn("sample means coincide; projection basis has rank 0", RuntimeWarning,
                      stacklevel=2)
    return ProjectionBasis(V, B, s, E[-1].copy(), rank, residual)


def reduce_rank(basis: ProjectionBasis, rank: int) -> ProjectionBasis:
    """Keep only the leading ``rank`` directions (the near-coplanar case)."""
    rank = max(0, min(int(rank), basis.effective_rank))
    B = basis.orthonormal_basis[:rank]
    V = basis.raw_vectors
    residual = np.linalg.norm(V - (V @ B.T) @ B, axis=1)
    return ProjectionBasis(V, B, basis.singular_values, basis.anchor, rank, residual)


def project(basis: ProjectionBasis, d: Dataset) -> Dataset:
    if basis.degenerate:
        raise RankZeroBasisError(
            "projection basis has rank 0: the sample means carry no informative direction")
    return d.with_points(basis.coordinates(d.points))


def msp(samples: Sequence[Dataset], rank_tol: float = 1e-6,
        max_rank: Optional[int] = None) -> ProjectionBasis:
    return build_basis(estimate_means(samples), rank_tol=rank_tol, max_rank=max_rank)


def msp_bound(params: MSPBoundParams, epsilon: float) -> MSPBounds:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    inv = sum(1.0 / n for n in params.sample_sizes)
    base = params.dims * params.sigma_max_sq * inv / epsilon ** 2
    return MSPBounds(
        mean_deviation=float(min(1.0, base)),
        distance_distortion=float(min(1.0, 4.0 * params.coeff_bound ** 2 * base)),
    )


def operation_count(dims: int, sample_sizes: Sequence[int]) -> int:
    """Arithmetic cost of computing the means and differences."""
    m = len(sample_sizes)
    return dims * sum(sample_sizes) + 2 * dims * (m - 1)
