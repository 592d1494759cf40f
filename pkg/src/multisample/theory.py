"""Exact computations on discrete mixture weights: L1-optimal sets, the gap,
and the sample-size constants for the clustering-tree guarantee."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset, IntervalComponent, MixtureSpec, RngHandle

MAX_EXACT_K = 20


def _weights(phi, name="phi") -> np.ndarray:
    w = np.asarray(phi, dtype=float).reshape(-1)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError(f"{name} has negative or non-finite entries")
    s = w.sum()
    if abs(s - 1.0) > 1e-9:
        raise ValueError(f"{name} sums to {s}, expected 1")
    return w / s


def _pair(phi1, phi2):
    a, b = _weights(phi1, "phi1"), _weights(phi2, "phi2")
    if a.shape != b.shape:
        raise ValueError(f"weight vectors have lengths {len(a)} and {len(b)}")
    return a, b


def l1_optimal_set(phi1, phi2):
    """Components where sample 1 outweighs sample 2, and the L1 distance
    sum_i max(phi1_i - phi2_i, 0) that their union attains."""
    a, b = _pair(phi1, phi2)
    diff = a - b
    chosen = frozenset(int(i) for i in np.flatnonzero(diff > 0))
    return chosen, float(np.clip(diff, 0, None).sum())


def subset_masks(K: int) -> np.ndarray:
    """Boolean (2^K, K) matrix, row s = binary expansion of s."""
    s = np.arange(1 << K, dtype=np.int64)
    return ((s[:, None] >> np.arange(K)) & 1).astype(bool)


@dataclass(frozen=True)
class GapReport:
    gap: float
    witness_subset: frozenset
    witness_index: int
    bounded_b: float
    recommended_tau: float

    def to_dict(self) -> dict:
        return {"gap": self.gap, "witness_subset": sorted(self.witness_subset),
                "witness_index": self.witness_index, "bounded_b": self.bounded_b,
                "recommended_tau": self.recommended_tau}


def compute_gap(phi1, phi2) -> GapReport:
    """Minimum over subsets I (|I| > 1) and i in I of the difference between
    the two samples' conditional weights of i given I.

    Subsets carrying zero mass in either sample have no conditional weights
    and are skipped.
    """
    a, b = _pair(phi1, phi2)
    K = len(a)
    if K < 2:
        raise ValueError("the gap needs K >= 2")
    if K > MAX_EXACT_K:
        raise ValueError(f"exact gap enumeration is limited to K <= {MAX_EXACT_K} "
                         f"(2^K subsets); sample subsets instead")
    best = (math.inf, frozenset(), -1)
    chunk = 1 << 14
    for start in range(0, 1 << K, chunk):
        s = np.arange(start, min(start + chunk, 1 << K), dtype=np.int64)
        M = ((s[:, None] >> np.arange(K)) & 1).astype(bool)
        keep = M.sum(axis=1) > 1
        M, s = M[keep], s[keep]
        if not len(s):
            continue
        sa = M @ a
        sb = M @ b
        ok = (sa > 0) & (sb > 0)
        M, s, sa, sb = M[ok], s[ok], sa[ok], sb[ok]
        if not len(s):
            continue
        d = np.abs(a / sa[:, None] - b / sb[:, None])
        d = np.where(M, d, np.inf)
        i = np.argmin(d, axis=1)
        v = d[np.arange(len(s)), i]
        r = int(np.argmin(v))
        if v[r] < best[0]:
            best = (float(v[r]), frozenset(int(j) for j in np.flatnonzero(M[r])), int(i[r]))
    gap, witness, idx = best
    if not math.isfinite(gap):
        gap = 0.0
    b_min = float(min(a.min(), b.min()))
    return GapReport(gap, witness, idx, b_min, gap / 8.0)


@dataclass(frozen=True)
class Theorem2Constants:
    epsilon_cap: float
    epsilon_terms: tuple
    gamma_K: float
    delta: float
    N: float


def theorem2_constants(g: float, b: float, K: int, eps_star: float, delta_star: float,
                       oracle_n1: int) -> Theorem2Constants:
    """Constants from the proof of the clustering-tree guarantee.

    The oracle accuracy must stay below the four-way cap; at the cap,
    gamma_K = 4 eps K / g and the per-call confidence is delta*/4K. N is the
    sample size per mixture, given the oracle's own requirement ``oracle_n1``.
    """
    for name, v in (("g", g), ("b", b), ("eps_star", eps_star), ("delta_star", delta_star)):
        if not 0 < v < 1:
            raise ValueError(f"{name} must lie in (0, 1)")
    if K < 1 or oracle_n1 < 1:
        raise ValueError("K and oracle_n1 must be positive")
    terms = (g * g * b / (160 * K), b * g / (8 * K), g * g * b / (4 * K * (K + 3)),
             eps_star * g / (4 * K))
    eps = min(terms)
    delta = delta_star / (4 * K)
    N = max(4 * oracle_n1 / b, 2 / b ** 2 * math.log(1 / delta))
    return Theorem2Constants(eps, terms, 4 * eps * K / g, delta, N)


def discrete_dsc_simulate(spec: MixtureSpec, n1: int, n2: int, rng: RngHandle):
    """Labelled draws from the first two mixtures of an interval spec."""
    comps = spec.components
    if comps is None or not all(isinstance(c, IntervalComponent) for c in comps):
        raise ValueError("spec must carry IntervalComponent descriptors")
    if spec.num_samples < 2:
        raise ValueError("spec needs at least two weight rows")
    spans = sorted((c.low, c.high) for c in comps)
    for (_, hi), (lo, _) in zip(spans, spans[1:]):
        if lo <= hi:
            raise ValueError("component intervals overlap; supports must be disjoint")
    lows = np.array([c.low for c in comps])
    widths = np.array([c.high - c.low for c in comps])
    out = []
    for j, n in enumerate((n1, n2)):
        gen = rng.child(j).generator()
        labels = gen.choice(spec.num_components, size=n, p=spec.weight_matrix[j])
        x = lows[labels] + widths[labels] * gen.random(n)
        out.append(Dataset(x.reshape(-1, 1), sample_id=str(j + 1), labels=labels))
    return out[0], out[1]


def mixture_set_measure(phi, subset: Sequence[int]) -> float:
    """D(A) for A the union of the listed components."""
    w = np.asarray(phi, dtype=float)
    return float(w[list(subset)].sum()) if len(subset) else 0.0
