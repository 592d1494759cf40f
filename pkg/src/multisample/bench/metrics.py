"""Best-assignment accuracy and the exact one-sided sign test."""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import gammaln, logsumexp

EXHAUSTIVE_LIMIT = 8


def confusion_matrix(predicted, truth):
    """Rows: predicted cluster ids (sorted), columns: true labels (sorted)."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError(f"{len(predicted)} predictions for {len(truth)} labels")
    p_ids, p_inv = np.unique(predicted, return_inverse=True)
    t_ids, t_inv = np.unique(truth, return_inverse=True)
    C = np.zeros((len(p_ids), len(t_ids)), dtype=np.int64)
    np.add.at(C, (p_inv, t_inv), 1)
    return C


def _best_exhaustive(C: np.ndarray) -> int:
    J, K = C.shape
    size = max(J, K)
    P = np.zeros((size, size), dtype=np.int64)
    P[:J, :K] = C
    rows = np.arange(size)
    return int(max(P[rows, list(perm)].sum() for perm in itertools.permutations(range(size))))


def _best_hungarian(C: np.ndarray) -> int:
    r, c = linear_sum_assignment(C, maximize=True)
    return int(C[r, c].sum())


def accuracy_best_assignment(predicted, truth, K: int = None) -> float:
    """Fraction of points whose cluster maps to their true component under
    the best one-to-one matching; clusters left unmatched count as errors.

    ``K`` widens the label set to components absent from ``truth``; it
    never changes the optimum, since absent components match nothing.
    """
    C = confusion_matrix(predicted, truth)
    if len(C) == 0:
        return 0.0
    if K is not None and K > C.shape[1]:
        C = np.hstack([C, np.zeros((C.shape[0], K - C.shape[1]), dtype=C.dtype)])
    if max(C.shape) <= EXHAUSTIVE_LIMIT:
        best = _best_exhaustive(C)
    else:
        best = _best_hungarian(C)
    return best / C.sum()


def sign_test_pvalue(wins: int, trials: int) -> float:
    """P[X >= wins] for X ~ Binomial(trials, 1/2), summed in log space."""
    if not 0 <= wins <= trials:
        raise ValueError("need 0 <= wins <= trials")
    if wins == 0:
        return 1.0
    k = np.arange(wins, trials + 1)
    logs = gammaln(trials + 1) - gammaln(k + 1) - gammaln(trials - k + 1) - trials * math.log(2.0)
    return float(min(1.0, math.exp(logsumexp(logs))))
