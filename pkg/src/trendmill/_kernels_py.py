"""Pure-Python/numpy implementations of the hot kernels.

These define the reference semantics; ``_kernels.pyx`` must agree bit for bit.
"""
from __future__ import annotations

import re

import numpy as np

# Candidates within TIE_RTOL * (node sum of squares) of the best gain count as tied.
TIE_RTOL = 1e-10


def tie_floor(best_gain: float, sst: float) -> float:
    return best_gain - TIE_RTOL * sst


def centered(ys: np.ndarray):
    """Targets minus their mean, and their sum of squares; sequential sums only."""
    n = ys.shape[0]
    yc = ys - np.cumsum(ys)[-1] / n
    return yc, float(np.cumsum(yc * yc)[-1])


def split_gains(xs: np.ndarray, ys: np.ndarray, min_leaf: int):
    """Gains and thresholds for every legal cut of one feature.

    ``xs``/``ys`` must already be sorted lexicographically by (x, y).
    Returns ``(gains, thresholds, valid)`` indexed by cut position.
    """
    n = xs.shape[0]
    cs = np.cumsum(ys)
    total = cs[-1]
    nl = np.arange(1, n, dtype=np.int64)
    nr = n - nl
    sl = cs[:-1]
    sr = total - sl
    diff = sl / nl - sr / nr
    gains = ((nl * nr) / n) * (diff * diff)
    thresholds = 0.5 * (xs[:-1] + xs[1:])
    # Adjacent doubles can round the midpoint up to the right value; keep the cut strict.
    thresholds = np.where(thresholds >= xs[1:], xs[:-1], thresholds)
    valid = (xs[:-1] != xs[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
    return gains, thresholds, valid


def best_split(X: np.ndarray, y: np.ndarray, idx: np.ndarray, min_leaf: int):
    """Return ``(feature, threshold, gain)`` of the best split of rows ``idx``.

    Gains are computed on targets centred at the node mean, which leaves them
    unchanged mathematically but limits cancellation.

    ``feature`` is -1 when no legal cut exists.
    """
    n = idx.shape[0]
    p = X.shape[1]
    if n < 2:
        return -1, 0.0, 0.0
    ys_all, sst = centered(y[idx])
    per_feature = []
    best = -np.inf
    for f in range(p):
        xs = X[idx, f]
        order = np.lexsort((ys_all, xs))
        gains, thr, valid = split_gains(xs[order], ys_all[order], min_leaf)
        per_feature.append((gains, thr, valid))
        if valid.any():
            best = max(best, float(gains[valid].max()))
    if best == -np.inf:
        return -1, 0.0, 0.0
    floor = tie_floor(best, sst)
    for f, (gains, thr, valid) in enumerate(per_feature):
        hits = np.flatnonzero(valid & (gains >= floor))
        if hits.size:
            k = hits[0]
            return f, float(thr[k]), float(gains[k])
    raise AssertionError("unreachable: best gain has no candidate")


def outside_charset_mask(values: np.ndarray, allowed: str) -> np.ndarray:
    """True where a non-null string holds any character not in ``allowed``."""
    pattern = re.compile("[^" + re.escape(allowed) + "]")
    search = pattern.search
    return np.fromiter(
        (v is not None and search(v) is not None for v in values),
        dtype=bool,
        count=len(values),
    )


def predict_rows(feature, threshold, left, right, value, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=np.float64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out
