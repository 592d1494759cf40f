"""Per-trial pipelines, win counting and the experiment runner."""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..baselines import kmeans, pca_projection, random_projection
from ..core import Dataset, RngHandle
from ..dsc import DSCConfig, build_tree
from ..msp import msp, project
from ..oracle import TrainingConfig
from ..theory import compute_gap
from .data import _ALGO, ExperimentConfig, Trial, generate_trial, trial_rng
from .metrics import accuracy_best_assignment, sign_test_pvalue

TIE_TOL = 1e-12


class TrialError(RuntimeError):
    def __init__(self, trial: int, cause: BaseException):
        super().__init__(f"trial {trial} failed: {type(cause).__name__}: {cause}")
        self.trial = trial
        self.cause = cause


@dataclass
class TrialResult:
    trial_index: int
    accuracy: dict
    phi1: list
    phi2: list
    gap: float
    stream: tuple          # (seed, stream_id) the trial drew from
    dsc_leaves: int = 0


def dsc_config(cfg: ExperimentConfig) -> DSCConfig:
    return DSCConfig(tau=cfg.tau, min_points_per_side=cfg.dsc_min_points,
                     max_splits=4 * cfg.num_components,
                     oracle_config=TrainingConfig(max_depth=cfg.dsc_max_depth))


def cluster_labels(algorithm: str, s1: Dataset, s2: Dataset, k: int, rng: RngHandle,
                   target_dim: int = 1, restarts: int = 10,
                   dsc_cfg: DSCConfig = None) -> np.ndarray:
    """Cluster ids for the pooled points (s1 rows first, then s2)."""
    pooled = Dataset(np.vstack([s1.points, s2.points]), sample_id="pooled")
    if algorithm == "kmeans":
        return kmeans(pooled, k, restarts, rng=rng.child(0)).assignments
    if algorithm == "random_proj":
        low = random_projection(pooled, target_dim, rng.child(1))
    elif algorithm == "pca_proj":
        low = pca_projection(pooled, target_dim)
    elif algorithm == "msp":
        basis = msp([s1, s2], max_rank=min(max(k - 1, 1), target_dim))
        low = project(basis, pooled)
    elif algorithm == "dsc":
        tree = build_tree(s1, s2, dsc_cfg or DSCConfig(), rng.child(2))
        return tree.assign(pooled.points)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return kmeans(low, k, restarts, rng=rng.child(0)).assignments


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialResult:
    try:
        t: Trial = generate_trial(cfg, trial)
        truth = t.truth
        K = cfg.num_components
        algo_rng = trial_rng(cfg, trial).child(_ALGO)
        acc = {}
        leaves = 0
        for name in cfg.algorithms:
            labels = cluster_labels(name, t.s1, t.s2, K, algo_rng,
                                    cfg.projection_target_dim, cfg.kmeans_restarts,
                                    dsc_config(cfg))
            if name == "dsc":
                leaves = int(len(np.unique(labels)))
            acc[name] = accuracy_best_assignment(labels, truth, K)
        gap = compute_gap(t.phi1, t.phi2).gap if K >= 2 else 0.0
    except Exception as exc:  # surfaced with the trial index
        raise TrialError(trial, exc) from exc
    r = trial_rng(cfg, trial)
    return TrialResult(trial, acc, t.phi1.tolist(), t.phi2.tolist(), gap,
                       (r.seed, r.stream_id), leaves)


def _run_one(args):
    cfg, trial = args
    return run_trial(cfg, trial)


def summarize(cfg: ExperimentConfig, results) -> dict:
    algs = list(cfg.algorithms)
    acc = {a: np.array([r.accuracy[a] for r in results]) for a in algs}
    wins, ties, pvalues = {}, {}, {}
    for a in algs:
        wins[a], ties[a], pvalues[a] = {}, {}, {}
        for b in algs:
            if a == b:
                continue
            d = acc[a] - acc[b]
            w = int(np.sum(d > TIE_TOL))
            l = int(np.sum(d < -TIE_TOL))
            wins[a][b] = w
            ties[a][b] = len(d) - w - l
            pvalues[a][b] = sign_test_pvalue(w, w + l)
    return {
        "config": cfg.to_dict(),
        "total_dims": cfg.total_dims,
        "num_trials": len(results),
        "mean_accuracy": {a: float(acc[a].mean()) for a in algs},
        "wins": wins,
        "ties": ties,
        "sign_test_p": pvalues,
    }


@dataclass
class ExperimentResult:
    trials: list
    summary: dict = field(default_factory=dict)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """All trials of ``cfg``; output is identical for any worker count."""
    jobs = [(cfg, t) for t in range(cfg.num_trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    results.sort(key=lambda r: r.trial_index)
    return ExperimentResult(results, summarize(cfg, results))


def win_fraction(summary: dict, a: str, b: str) -> float:
    """Share of non-tied trials that ``a`` wins against ``b``."""
    w, l = summary["wins"][a][b], summary["wins"][b][a]
    return w / (w + l) if w + l else float("nan")


def trials_csv(results, total_dims: int = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dims", "trial", "algorithm", "accuracy"])
    for r in results:
        for name, value in r.accuracy.items():
            w.writerow([total_dims, r.trial_index, name, repr(float(value))])
    return buf.getvalue()


def trials_json(results) -> list:
    return [{"trial": r.trial_index, "phi1": r.phi1, "phi2": r.phi2, "gap": r.gap,
             "stream": list(r.stream), "dsc_leaves": r.dsc_leaves,
             "accuracy": r.accuracy} for r in results]


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
