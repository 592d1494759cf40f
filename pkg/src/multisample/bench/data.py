"""Synthetic Gaussian mixtures in the signal-plus-noise-dimensions setup."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from ..core import Dataset, RngHandle

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

ALGORITHMS = ("kmeans", "random_proj", "pca_proj", "msp", "dsc")
DEFAULT_CENTERS = ((0.0, 0.0), (3.0, 0.0), (-3.0, 3.0))

# child-stream keys under each trial's RngHandle
_WEIGHTS, _SIGNAL, _NOISE, _ALGO = 0, 1, 2, 3


@dataclass(frozen=True)
class ExperimentConfig:
    base_centers: tuple = DEFAULT_CENTERS
    noise_dims: int = 0
    noise_sigma: float = 1.0
    signal_sigma: float = 1.0
    points_per_sample: int = 80
    num_trials: int = 100
    algorithms: tuple = ALGORITHMS
    projection_target_dim: int = 1
    seed: int = 0
    tau: float = 0.1
    kmeans_restarts: int = 10
    dsc_max_depth: int = 6
    dsc_min_points: int = 20
    workers: int = 1

    def __post_init__(self):
        centers = tuple(tuple(float(v) for v in c) for c in self.base_centers)
        object.__setattr__(self, "base_centers", centers)
        algs = self.algorithms
        if isinstance(algs, str):
            algs = tuple(a.strip() for a in algs.split(",") if a.strip())
        object.__setattr__(self, "algorithms", tuple(algs))
        if len(centers) < 1 or len({len(c) for c in centers}) != 1:
            raise ValueError("base_centers must be K >= 1 vectors of equal length")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}; choose from {ALGORITHMS}")
        if self.noise_dims < 0:
            raise ValueError("noise_dims must be >= 0")
        if self.points_per_sample < self.num_components:
            raise ValueError("points_per_sample must be >= K")
        if self.num_trials < 1:
            raise ValueError("num_trials must be >= 1")
        if self.noise_sigma < 0 or self.signal_sigma < 0:
            raise ValueError("standard deviations must be non-negative")
        if not 1 <= self.projection_target_dim <= self.total_dims:
            raise ValueError("projection_target_dim must lie in [1, total dims]")

    @property
    def num_components(self) -> int:
        return len(self.base_centers)

    @property
    def signal_dims(self) -> int:
        return len(self.base_centers[0])

    @property
    def total_dims(self) -> int:
        return self.signal_dims + self.noise_dims

    def to_dict(self) -> dict:
        d = asdict(self)
        d["base_centers"] = [list(c) for c in self.base_centers]
        d["algorithms"] = list(self.algorithms)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        d = dict(d)
        if "base_centers" in d:
            d["base_centers"] = tuple(tuple(c) for c in d["base_centers"])
        if "algorithms" in d and not isinstance(d["algorithms"], str):
            d["algorithms"] = tuple(d["algorithms"])
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(path.read_text())
        else:
            data = json.loads(path.read_text())
        return cls.from_dict(data)


def skewed(**kwargs) -> ExperimentConfig:
    """Noise dimensions with variance 5."""
    kwargs.setdefault("noise_sigma", math.sqrt(5.0))
    return ExperimentConfig(**kwargs)


def trial_rng(cfg: ExperimentConfig, trial: int) -> RngHandle:
    return RngHandle(cfg.seed, trial)


def sample_weights(gen: np.random.Generator, K: int) -> np.ndarray:
    """K uniform draws on [0, 1], normalised to sum to one."""
    u = gen.random(K)
    while u.sum() <= 0:
        u = gen.random(K)
    return u / u.sum()


@dataclass(frozen=True, eq=False)
class Trial:
    s1: Dataset
    s2: Dataset
    phi1: np.ndarray
    phi2: np.ndarray

    @property
    def pooled(self) -> Dataset:
        return Dataset(np.vstack([self.s1.points, self.s2.points]), sample_id="pooled",
                       labels=np.concatenate([self.s1.labels, self.s2.labels]))

    @property
    def truth(self) -> np.ndarray:
        return np.concatenate([self.s1.labels, self.s2.labels])


def generate_trial(cfg: ExperimentConfig, trial: int) -> Trial:
    """Two labelled samples for one trial.

    Signal and noise coordinates come from separate streams, so adding noise
    dimensions leaves the signal coordinates of a (seed, trial) unchanged.
    """
    rng = trial_rng(cfg, trial)
    K = cfg.num_components
    wgen = rng.child(_WEIGHTS).generator()
    phis = [sample_weights(wgen, K), sample_weights(wgen, K)]
    centers = np.array(cfg.base_centers)
    samples = []
    for j, phi in enumerate(phis):
        sgen = rng.child(_SIGNAL).child(j).generator()
        labels = sgen.choice(K, size=cfg.points_per_sample, p=phi)
        signal = centers[labels] + cfg.signal_sigma * sgen.standard_normal(
            (cfg.points_per_sample, cfg.signal_dims))
        ngen = rng.child(_NOISE).child(j).generator()
        noise = cfg.noise_sigma * ngen.standard_normal((cfg.points_per_sample, cfg.noise_dims))
        samples.append(Dataset(np.hstack([signal, noise]), sample_id=str(j + 1), labels=labels))
    return Trial(samples[0], samples[1], phis[0], phis[1])
