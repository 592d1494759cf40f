"""Domain types, CSV/JSON dataset I/O and seeded random streams."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class DatasetError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Weighted points from a single sample.

    ``points`` is an (N, n) array. ``labels`` holds ground-truth component
    indices when known (synthetic data); algorithms never read it.
    """

    points: np.ndarray
    weights: Optional[np.ndarray] = None
    sample_id: str = "1"
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DatasetError("points must be a 2-D array with dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise DatasetError("points contain non-finite coordinates")
        if self.weights is None:
            w = np.ones(len(pts))
        else:
            w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(w) != len(pts):
            raise DatasetError(f"{len(w)} weights for {len(pts)} points")
        if len(w) and (np.any(w < 0) or not np.all(np.isfinite(w))):
            raise DatasetError("weights must be finite and non-negative")
        if len(w) and not np.any(w > 0):
            raise DatasetError("at least one weight must be positive")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "sample_id", str(self.sample_id))
        if self.labels is not None:
            lab = np.array(self.labels, dtype=np.int64, copy=True).reshape(-1)
            if len(lab) != len(pts):
                raise DatasetError(f"{len(lab)} labels for {len(pts)} points")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def subset(self, mask_or_idx) -> "Dataset":
        labels = None if self.labels is None else self.labels[mask_or_idx]
        return Dataset(self.points[mask_or_idx], self.weights[mask_or_idx],
                       self.sample_id, labels)

    def with_points(self, points: np.ndarray) -> "Dataset":
        return Dataset(points, self.weights, self.sample_id, self.labels)

    def with_weights(self, weights: np.ndarray) -> "Dataset":
        return Dataset(self.points, weights, self.sample_id, self.labels)


@dataclass(frozen=True)
class IntervalComponent:
    """Uniform distribution on [low, high] (1-D, disjoint-support tests)."""

    low: float
    high: float

    def __post_init__(self):
        if not self.high > self.low:
            raise ValueError(f"empty interval [{self.low}, {self.high}]")


@dataclass(frozen=True)
class GaussianComponent:
    """Gaussian with the given mean and isotropic (scalar) or diagonal std."""

    mean: tuple
    std: object = 1.0


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """K components mixed with one weight row per sample (M x K)."""

    weight_matrix: np.ndarray
    components: Optional[Sequence] = None

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.weight_matrix, dtype=float))
        if W.ndim != 2 or W.shape[1] < 1:
            raise ValueError("weight_matrix must be M x K with K >= 1")
        if np.any(W < 0) or not np.all(np.isfinite(W)):
            raise ValueError("mixing weights must be finite and non-negative")
        sums = W.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError(f"weight rows must sum to 1, got {sums.tolist()}")
        object.__setattr__(self, "weight_matrix", _frozen(W))
        if self.components is not None:
            comps = tuple(self.components)
            if len(comps) != W.shape[1]:
                raise ValueError(f"{len(comps)} components for K={W.shape[1]}")
            object.__setattr__(self, "components", comps)

    @property
    def num_components(self) -> int:
        return self.weight_matrix.shape[1]

    @property
    def num_samples(self) -> int:
        return self.weight_matrix.shape[0]

    @property
    def phi_min(self) -> float:
        return float(self.weight_matrix.min())


@dataclass(frozen=True)
class RngHandle:
    """Value-like handle to a reproducible random stream.

    Streams are derived with ``numpy.random.SeedSequence`` using the
    stream id (and any further child keys) as the spawn key, so trial ``t``
    always sees the same draws no matter which worker runs it.
    """

    seed: int
    stream_id: int = 0
    path: tuple = field(default=())

    def __post_init__(self):
        mask = (1 << 64) - 1
        object.__setattr__(self, "seed", int(self.seed) & mask)
        object.__setattr__(self, "stream_id", int(self.stream_id) & mask)

    def child(self, key: int) -> "RngHandle":
        return RngHandle(self.seed, self.stream_id, self.path + (int(key),))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + self.path)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def word(self) -> int:
        """A 64-bit integer derived from this stream (for keyed sub-streams)."""
        return int(self.seed_sequence().generate_state(1, dtype=np.uint64)[0])


def weighted_mean(d: Dataset) -> np.ndarray:
    total = d.weights.sum()
    if not total > 0:
        raise DatasetError("weighted mean of a dataset with zero total weight")
    return (d.weights @ d.points) / total


def load_dataset(path, sample_id: Optional[str] = None) -> Dataset:
    """Read a CSV of real numbers, one point per row, optional header line.

    A sidecar ``<path>.json`` (or same stem with ``.json``) with
    ``{"sample_id": ..., "labels": [...]}`` is picked up when present.
    """
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                if lineno == 1 and not rows:
                    continue  # header
                raise DatasetError(f"row {lineno} has a non-numeric cell: {row!r}") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise DatasetError(
                    f"row {lineno} has {len(values)} column{'s' if len(values) != 1 else ''}, "
                    f"expected {width}")
            if not all(math.isfinite(v) for v in values):
                raise DatasetError(f"row {lineno} has a non-finite value")
            rows.append(values)
    if not rows:
        raise DatasetError(f"{path} contains no data rows")

    labels = None
    sidecar = sidecar_path(path)
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        if sample_id is None:
            sample_id = meta.get("sample_id")
        labels = meta.get("labels")
    return Dataset(np.array(rows), sample_id=sample_id if sample_id is not None else path.stem,
                   labels=labels)


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_suffix(".json")


def save_dataset(d: Dataset, path, header: Optional[Sequence[str]] = None) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in d.points:
            w.writerow([repr(float(v)) for v in row])
    meta = {"sample_id": d.sample_id}
    if d.labels is not None:
        meta["labels"] = [int(v) for v in d.labels]
    sidecar_path(path).write_text(json.dumps(meta) + "\n")
