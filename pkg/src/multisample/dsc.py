"""Double-sample clustering: a tree of classifiers separating two samples."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .core import Dataset, RngHandle
from .oracle import Oracle, OracleOutput, TrainedClassifier, TrainingConfig, TreeOracle

STOP_ESTIMATOR = "estimator"
STOP_MIN_POINTS = "min_points"
STOP_MAX_SPLITS = "max_splits"


@dataclass(frozen=True)
class DSCConfig:
    tau: float = 0.1
    min_points_per_side: int = 20
    max_splits: int = 32
    oracle_config: TrainingConfig = field(default_factory=TrainingConfig)

    def __post_init__(self):
        if not 0 < self.tau < 0.5:
            raise ValueError("tau must lie in (0, 1/2)")
        if self.min_points_per_side < 1:
            raise ValueError("min_points_per_side must be >= 1")
        if self.max_splits < 0:
            raise ValueError("max_splits must be >= 0")

    @classmethod
    def for_weights(cls, phi1, phi2, **kwargs) -> "DSCConfig":
        """tau = gap/8 and a split budget of 4K, from known mixing weights."""
        from .theory import compute_gap

        report = compute_gap(phi1, phi2)
        if report.gap <= 0:
            raise ValueError("the weight vectors have zero gap; no tau can be recommended")
        kwargs.setdefault("max_splits", 4 * len(phi1))
        return cls(tau=report.recommended_tau, **kwargs)


@dataclass
class LeafNode:
    leaf_id: int
    n1: int
    n2: int
    stop_reason: str
    error_estimate: Optional[float] = None  # oracle's e when it was consulted


@dataclass
class InternalNode:
    classifier: TrainedClassifier
    error_estimate: float
    neg_child: "TreeNode"
    pos_child: "TreeNode"
    n1: int = 0
    n2: int = 0


TreeNode = Union[LeafNode, InternalNode]


@dataclass
class ClusteringTree:
    root: TreeNode
    dim: int
    tau: float
    num_splits: int

    @property
    def num_leaves(self) -> int:
        return sum(1 for _ in self.leaves())

    def leaves(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, LeafNode):
                yield node
            else:
                stack.append(node.pos_child)
                stack.append(node.neg_child)

    def internal_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, InternalNode):
                yield node
                stack.extend([node.pos_child, node.neg_child])

    def depth(self) -> int:
        def d(node):
            if isinstance(node, LeafNode):
                return 0
            return 1 + max(d(node.neg_child), d(node.pos_child))
        return d(self.root)

    def assign(self, X) -> np.ndarray:
        """Leaf id of every row of ``X``; h(x) = 0 routes to the positive child."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"points have dimension {X.shape[1]}, tree expects {self.dim}")
        out = np.empty(len(X), dtype=np.int64)
        stack = [(self.root, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if isinstance(node, LeafNode):
                out[idx] = node.leaf_id
                continue
            if len(idx) == 0:
                continue
            neg = node.classifier.predict(X[idx]) < 0
            stack.append((node.neg_child, idx[neg]))
            stack.append((node.pos_child, idx[~neg]))
        return out

    def to_dict(self) -> dict:
        def enc(node):
            if isinstance(node, LeafNode):
                return {"leaf_id": node.leaf_id, "n1": node.n1, "n2": node.n2,
                        "stop_reason": node.stop_reason, "error_estimate": node.error_estimate}
            return {"error_estimate": node.error_estimate, "n1": node.n1, "n2": node.n2,
                    "classifier": node.classifier.to_dict(),
                    "neg_child": enc(node.neg_child), "pos_child": enc(node.pos_child)}
        return {"dim": self.dim, "tau": self.tau, "num_splits": self.num_splits,
                "root": enc(self.root)}

    @classmethod
    def from_dict(cls, d: dict) -> "ClusteringTree":
        def dec(n):
            if "leaf_id" in n:
                return LeafNode(int(n["leaf_id"]), int(n["n1"]), int(n["n2"]),
                                n["stop_reason"], n.get("error_estimate"))
            return InternalNode(TrainedClassifier.from_dict(n["classifier"]),
                                float(n["error_estimate"]), dec(n["neg_child"]),
                                dec(n["pos_child"]), int(n.get("n1", 0)), int(n.get("n2", 0)))
        return cls(dec(d["root"]), int(d["dim"]), float(d["tau"]), int(d["num_splits"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class _Pending:
    idx1: np.ndarray
    idx2: np.ndarray
    order: int
    node: Optional[TreeNode] = None
    children: tuple = ()


def build_tree(s1: Dataset, s2: Dataset, cfg: DSCConfig = DSCConfig(),
               rng: Optional[RngHandle] = None, oracle: Optional[Oracle] = None) -> ClusteringTree:
    """Recursively split the two samples until the oracle's error estimate
    reaches 1/2 - tau.

    Nodes are expanded breadth-first so that ``max_splits`` caps the total
    number of accepted splits in a reproducible order. Every node retrains
    the oracle with w1 = 1 and w2 = W1/W2 computed from the points that
    reached it.
    """
    if len(s1) == 0 or len(s2) == 0:
        raise ValueError("both samples must be non-empty")
    if s1.dim != s2.dim:
        raise ValueError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    rng = rng if rng is not None else RngHandle(0)
    oracle = oracle if oracle is not None else TreeOracle(cfg.oracle_config)
    threshold = 0.5 - cfg.tau

    root = _Pending(np.arange(len(s1)), np.arange(len(s2)), 0)
    queue = deque([root])
    counter = 1
    splits = 0
    while queue:
        p = queue.popleft()
        n1, n2 = len(p.idx1), len(p.idx2)
        if n1 == 0 or n2 == 0:
            p.node = LeafNode(-1, n1, n2, STOP_MIN_POINTS)
            continue
        if splits >= cfg.max_splits:
            p.node = LeafNode(-1, n1, n2, STOP_MAX_SPLITS)
            continue
        a, b = s1.subset(p.idx1), s2.subset(p.idx2)
        out: OracleOutput = oracle(a, b, 1.0, a.total_weight / b.total_weight, rng.child(p.order))
        if out.error_estimate >= threshold:
            p.node = LeafNode(-1, n1, n2, STOP_ESTIMATOR, out.error_estimate)
            continue
        neg1 = out.classifier.predict(a.points) < 0
        neg2 = out.classifier.predict(b.points) < 0
        sides = (neg1.sum(), n1 - neg1.sum(), neg2.sum(), n2 - neg2.sum())
        if min(sides) < cfg.min_points_per_side:
            p.node = LeafNode(-1, n1, n2, STOP_MIN_POINTS, out.error_estimate)
            continue
        splits += 1
        neg_p = _Pending(p.idx1[neg1], p.idx2[neg2], counter)
        pos_p = _Pending(p.idx1[~neg1], p.idx2[~neg2], counter + 1)
        counter += 2
        p.node = InternalNode(out.classifier, out.error_estimate, None, None, n1, n2)
        p.children = (neg_p, pos_p)
        queue.extend(p.children)

    next_id = 0

    def link(p: _Pending) -> TreeNode:
        nonlocal next_id
        if isinstance(p.node, LeafNode):
            p.node.leaf_id = next_id
            next_id += 1
            return p.node
        p.node.neg_child = link(p.children[0])
        p.node.pos_child = link(p.children[1])
        return p.node

    return ClusteringTree(link(root), s1.dim, cfg.tau, splits)


def assign(tree: ClusteringTree, p) -> int:
    p = np.asarray(p, dtype=float).reshape(-1)
    return int(tree.assign(p.reshape(1, -1))[0])


@dataclass(frozen=True)
class ComponentReport:
    component: int
    best_leaf: int
    captured: float          # fraction of this component in best_leaf
    max_other: float         # largest fraction of any other component in best_leaf
    ok: bool


def epsilon_clusters(tree: ClusteringTree, labeled: Dataset, epsilon: float,
                     labels: Optional[np.ndarray] = None):
    """Whether every component has a leaf holding >= 1-eps of it and < eps of
    every other component (empirical measures). Returns (ok, reports)."""
    labels = labeled.labels if labels is None else np.asarray(labels)
    if labels is None:
        raise ValueError("dataset has no ground-truth labels")
    leaf = tree.assign(labeled.points)
    comps = np.unique(labels)
    nleaves = tree.num_leaves
    frac = np.zeros((len(comps), nleaves))
    for r, c in enumerate(comps):
        m = labels == c
        frac[r] = np.bincount(leaf[m], weights=labeled.weights[m], minlength=nleaves) \
            / labeled.weights[m].sum()
    reports = []
    for r, c in enumerate(comps):
        others = np.delete(frac, r, axis=0)
        max_other = others.max(axis=0) if len(others) else np.zeros(nleaves)
        good = (frac[r] >= 1 - epsilon) & (max_other < epsilon)
        if good.any():
            best = int(np.flatnonzero(good)[0])
        else:
            best = int(np.argmax(frac[r]))
        reports.append(ComponentReport(int(c), best, float(frac[r, best]),
                                       float(max_other[best]), bool(good.any())))
    return all(rep.ok for rep in reports), reports
