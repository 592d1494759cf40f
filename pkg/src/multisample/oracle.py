"""Binary learning oracle: a weighted-Gini CART tree plus a holdout error estimate."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional, Protocol, Union

import numpy as np

from .core import Dataset, RngHandle


@dataclass(frozen=True)
class TrainingConfig:
    max_depth: int = 6
    min_leaf_weight: float = 0.01  # fraction of total training weight
    holdout_fraction: float = 0.3

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if not 0 <= self.min_leaf_weight < 0.5:
            raise ValueError("min_leaf_weight must lie in [0, 0.5)")
        if not 0 < self.holdout_fraction < 1:
            raise ValueError("holdout_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Node"   # x[feature] <= threshold
    right: "Node"


Node = Union[Leaf, Split]


def _node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"label": node.label}
    return {"feature": node.feature, "threshold": node.threshold,
            "left": _node_to_dict(node.left), "right": _node_to_dict(node.right)}


def _node_from_dict(d: dict) -> Node:
    if "label" in d:
        return Leaf(int(d["label"]))
    return Split(int(d["feature"]), float(d["threshold"]),
                 _node_from_dict(d["left"]), _node_from_dict(d["right"]))


def _depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(_depth(node.left), _depth(node.right))


@dataclass(frozen=True)
class TrainedClassifier:
    root: Node
    dim: int
    config: TrainingConfig

    @property
    def depth(self) -> int:
        return _depth(self.root)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"points have dimension {X.shape[1]}, classifier expects {self.dim}")
        out = np.empty(len(X), dtype=np.int64)
        self._route(self.root, X, np.arange(len(X)), out)
        return out

    def _route(self, node, X, idx, out):
        while isinstance(node, Split):
            go_left = X[idx, node.feature] <= node.threshold
            self._route(node.left, X, idx[go_left], out)
            idx = idx[~go_left]
            node = node.right
        out[idx] = node.label

    def to_dict(self) -> dict:
        return {"dim": self.dim, "config": asdict(self.config), "tree": _node_to_dict(self.root)}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedClassifier":
        return cls(_node_from_dict(d["tree"]), int(d["dim"]), TrainingConfig(**d["config"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _leaf_label(pos: float, neg: float) -> int:
    return 1 if pos >= neg else -1


def _best_split(X, y, w, min_leaf):
    """Weighted-Gini best (feature, threshold) or None.

    Minimises W_L * gini_L + W_R * gini_R over every midpoint between
    distinct consecutive values; ties go to the lowest feature, then the
    lowest threshold.
    """
    n, p = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    Xs = np.take_along_axis(X, order, axis=0)
    wpos = np.where(y > 0, w, 0.0)[order]
    wneg = np.where(y > 0, 0.0, w)[order]
    PL = np.cumsum(wpos, axis=0)[:-1]
    NL = np.cumsum(wneg, axis=0)[:-1]
    P, N = wpos.sum(axis=0), wneg.sum(axis=0)
    PR, NR = P - PL, N - NL
    WL, WR = PL + NL, PR + NR
    valid = (Xs[1:] > Xs[:-1]) & (WL >= min_leaf) & (WR >= min_leaf) & (WL > 0) & (WR > 0)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        cost = WL - (PL ** 2 + NL ** 2) / WL + WR - (PR ** 2 + NR ** 2) / WR
    cost = np.where(valid, cost, np.inf)
    parent = (P[0] + N[0]) - (P[0] ** 2 + N[0] ** 2) / (P[0] + N[0])
    flat = np.argmin(cost.T)  # feature-major order
    f, k = divmod(int(flat), n - 1)
    if not cost[k, f] < parent - 1e-15 * max(1.0, parent):
        return None
    lo, hi = Xs[k, f], Xs[k + 1, f]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return f, float(thr)


def fit_tree(X: np.ndarray, y: np.ndarray, w: np.ndarray,
             config: TrainingConfig = TrainingConfig()) -> TrainedClassifier:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    w = np.asarray(w, dtype=float)
    min_leaf = config.min_leaf_weight * w.sum()

    def grow(idx, depth):
        wi, yi = w[idx], y[idx]
        pos = float(wi[yi > 0].sum())
        neg = float(wi[yi <= 0].sum())
        if depth >= config.max_depth or pos == 0 or neg == 0 or len(idx) < 2:
            return Leaf(_leaf_label(pos, neg))
        found = _best_split(X[idx], yi, wi, min_leaf)
        if found is None:
            return Leaf(_leaf_label(pos, neg))
        f, thr = found
        left = X[idx, f] <= thr
        lnode = grow(idx[left], depth + 1)
        rnode = grow(idx[~left], depth + 1)
        if isinstance(lnode, Leaf) and isinstance(rnode, Leaf) and lnode.label == rnode.label:
            return Leaf(lnode.label)
        return Split(f, thr, lnode, rnode)

    return TrainedClassifier(grow(np.arange(len(X)), 0), X.shape[1], config)


@dataclass(frozen=True)
class OracleOutput:
    classifier: TrainedClassifier
    error_estimate: float

    def __post_init__(self):
        if not 0.0 <= self.error_estimate <= 1.0:
            raise ValueError("error estimate outside [0, 1]")


class Oracle(Protocol):
    def __call__(self, s1: Dataset, s2: Dataset, w1: float, w2: float,
                 rng: RngHandle) -> OracleOutput: ...


def _holdout_mask(n: int, fraction: float, key: int) -> np.ndarray:
    # The mask depends only on (key, n), so swapping the two samples
    # mirrors the split exactly.
    mask = np.zeros(n, dtype=bool)
    if n < 2:
        return mask
    k = min(max(int(round(fraction * n)), 1), n - 1)
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([key, n])))
    mask[gen.permutation(n)[:k]] = True
    return mask


def balanced_error(h_pos1: np.ndarray, w1: np.ndarray, h_pos2: np.ndarray, w2: np.ndarray) -> float:
    """Error of a classifier when each sample carries total mass 1/2.

    ``h_pos*`` flags points the classifier labels +1; sample 1 is the
    positive class.
    """
    e1 = w1[~h_pos1].sum() / w1.sum()
    e2 = w2[h_pos2].sum() / w2.sum()
    return float(0.5 * (e1 + e2))


def train(s1: Dataset, s2: Dataset, w1: float = 1.0, w2: float = 1.0,
          cfg: TrainingConfig = TrainingConfig(),
          rng: Optional[RngHandle] = None) -> OracleOutput:
    """Fit a tree separating ``s1`` (+1) from ``s2`` (-1).

    Point weights are the dataset weights times ``w1``/``w2``. The error
    estimate is measured on a stratified holdout under the balanced
    mixture (each sample totals 1/2). Samples with a single point cannot be
    split and are scored on the training data instead.
    """
    if len(s1) == 0 or len(s2) == 0:
        raise ValueError("both samples must be non-empty")
    if s1.dim != s2.dim:
        raise ValueError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    if not (w1 > 0 and w2 > 0):
        raise ValueError("sample weights must be positive")
    if not (s1.total_weight > 0 and s2.total_weight > 0):
        raise ValueError("a sample has zero total weight")
    rng = rng if rng is not None else RngHandle(0)
    key = rng.word()
    hold1 = _holdout_mask(len(s1), cfg.holdout_fraction, key)
    hold2 = _holdout_mask(len(s2), cfg.holdout_fraction, key)
    tr1 = ~hold1 if hold1.any() else np.ones(len(s1), dtype=bool)
    tr2 = ~hold2 if hold2.any() else np.ones(len(s2), dtype=bool)
    if s1.weights[tr1].sum() <= 0 or s2.weights[tr2].sum() <= 0:
        tr1 = np.ones(len(s1), dtype=bool)
        tr2 = np.ones(len(s2), dtype=bool)

    X = np.vstack([s1.points[tr1], s2.points[tr2]])
    y = np.concatenate([np.ones(tr1.sum(), dtype=np.int64), -np.ones(tr2.sum(), dtype=np.int64)])
    w = np.concatenate([s1.weights[tr1] * w1, s2.weights[tr2] * w2])
    w = w / w.sum()
    clf = fit_tree(X, y, w, cfg)

    ev1 = hold1 if hold1.any() and s1.weights[hold1].sum() > 0 else tr1
    ev2 = hold2 if hold2.any() and s2.weights[hold2].sum() > 0 else tr2
    e = balanced_error(clf.predict(s1.points[ev1]) > 0, s1.weights[ev1],
                       clf.predict(s2.points[ev2]) > 0, s2.weights[ev2])
    return OracleOutput(clf, min(1.0, max(0.0, e)))


class TreeOracle:
    """Default oracle bound to a training config."""

    def __init__(self, cfg: TrainingConfig = TrainingConfig()):
        self.cfg = cfg

    def __call__(self, s1, s2, w1, w2, rng):
        return train(s1, s2, w1, w2, self.cfg, rng)
