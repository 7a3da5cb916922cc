"""Binary regression tree grown by greedy variance reduction, plus split and RMSE helpers."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .rng import Xoshiro256

TREE_FORMAT = "trendmill.tree/1"


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class TreeParams:
    """``max_depth=None`` grows until leaves are pure or unsplittable."""

    max_depth: int | None = 5
    min_samples_leaf: int = 1
    min_variance_gain: float = 0.0

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise TreeError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise TreeError("min_samples_leaf must be >= 1")
        if not self.min_variance_gain >= 0:
            raise TreeError("min_variance_gain must be >= 0")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 1234

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise TreeError("train_fraction must lie strictly between 0 and 1")
        if self.seed < 0:
            raise TreeError("seed must be non-negative")


class Subset(NamedTuple):
    X: np.ndarray
    y: np.ndarray
    index: np.ndarray


def split_indices(n: int, spec: SplitSpec = SplitSpec()) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle, cut at ``floor(train_fraction * n)``; each side re-sorted."""
    if n < 2:
        raise TreeError(f"need at least 2 rows to split, got {n}")
    perm = Xoshiro256(spec.seed).permutation(n)
    cut = math.floor(spec.train_fraction * n)
    cut = min(max(cut, 1), n - 1)
    train = np.sort(np.array(perm[:cut], dtype=np.intp))
    test = np.sort(np.array(perm[cut:], dtype=np.intp))
    return train, test


def split_train_test(X, y, spec: SplitSpec = SplitSpec()) -> tuple[Subset, Subset]:
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] != y.shape[0]:
        raise TreeError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    train, test = split_indices(y.shape[0], spec)
    return Subset(X[train], y[train], train), Subset(X[test], y[test], test)


class RegressionTree:
    """Array-backed tree; nodes are stored in preorder with explicit child indices.

    ``feature[i] == -1`` marks a leaf. Routing sends ``x[f] <= threshold`` left.
    """

    def __init__(self, feature, threshold, left, right, value, n_samples, n_features: int,
                 params: TreeParams = TreeParams()):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)
        self.n_samples = np.asarray(n_samples, dtype=np.int64)
        self.n_features = int(n_features)
        self.params = params
        for arr in (self.feature, self.threshold, self.left, self.right, self.value, self.n_samples):
            arr.flags.writeable = False

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    @property
    def leaf_count(self) -> int:
        return int((self.feature < 0).sum())

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            if self.feature[node] < 0:
                best = max(best, d)
            else:
                stack.append((int(self.left[node]), d + 1))
                stack.append((int(self.right[node]), d + 1))
        return best

    def predict_one(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise TreeError(f"expected {self.n_features} features, got shape {x.shape}")
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return float(self.value[node])

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(getattr(X, "values", X), dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise TreeError(f"expected {self.n_features} features, got {X.shape[1]}")
        return kernels.predict_rows(self.feature, self.threshold, self.left, self.right,
                                    self.value, X)

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty(X.shape[0], dtype=np.int64)
        for i, row in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                node = self.left[node] if row[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[i] = node
        return out

    def to_dict(self) -> dict:
        nodes = []
        for i in range(self.node_count):
            if self.feature[i] < 0:
                nodes.append({"id": i, "value": float(self.value[i]),
                              "n_samples": int(self.n_samples[i])})
            else:
                nodes.append({"id": i, "feature": int(self.feature[i]),
                              "threshold": float(self.threshold[i]),
                              "left": int(self.left[i]), "right": int(self.right[i]),
                              "n_samples": int(self.n_samples[i])})
        return {"format": TREE_FORMAT, "n_features": self.n_features,
                "params": asdict(self.params), "nodes": nodes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RegressionTree":
        doc = json.loads(text)
        if doc.get("format") != TREE_FORMAT:
            raise TreeError(f"unsupported tree format {doc.get('format')!r}")
        nodes = sorted(doc["nodes"], key=lambda n: n["id"])
        feature = [n.get("feature", -1) for n in nodes]
        return cls(
            feature,
            [n.get("threshold", 0.0) for n in nodes],
            [n.get("left", -1) for n in nodes],
            [n.get("right", -1) for n in nodes],
            [n.get("value", 0.0) for n in nodes],
            [n["n_samples"] for n in nodes],
            doc["n_features"],
            TreeParams(**doc["params"]),
        )


def fit(X, y, params: TreeParams = TreeParams()) -> RegressionTree:
    """Grow a tree greedily, maximising n*Var(parent) - n_L*Var(L) - n_R*Var(R).

    Candidate thresholds are midpoints between consecutive distinct values.
    Near-equal gains resolve to the lowest feature index, then lowest threshold.
    """
    X = np.ascontiguousarray(np.asarray(getattr(X, "values", X), dtype=np.float64))
    y = np.ascontiguousarray(np.asarray(y, dtype=np.float64))
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise TreeError(f"X has {X.shape[0]} rows but y has shape {y.shape}")
    if y.shape[0] == 0:
        raise TreeError("cannot fit on an empty training set")
    if not np.isfinite(y).all():
        raise TreeError("targets must be finite")
    if not np.isfinite(X).all():
        raise TreeError("features must be finite")

    max_depth = params.max_depth if params.max_depth is not None else np.iinfo(np.int64).max
    min_leaf = params.min_samples_leaf
    feature, threshold, left, right, value, n_samples = [], [], [], [], [], []
    # (row indices, depth, parent node, is_left_child)
    stack = [(np.arange(y.shape[0], dtype=np.intp), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        yn = y[idx]
        n = idx.shape[0]
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        pure = bool((yn == yn[0]).all())
        value.append(float(yn[0]) if pure else float(yn.mean()))
        n_samples.append(n)
        if pure or depth >= max_depth or n < 2 * min_leaf:
            continue
        f, thr, gain = kernels.best_split(X, y, idx, min_leaf)
        if f < 0 or gain < params.min_variance_gain:
            continue
        go_left = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        stack.append((idx[~go_left], depth + 1, node, False))
        stack.append((idx[go_left], depth + 1, node, True))
    return RegressionTree(feature, threshold, left, right, value, n_samples, X.shape[1], params)


def predict(tree: RegressionTree, x) -> float:
    return tree.predict_one(x)


def rmse(y, yhat) -> float:
    """Root-mean-square error, sqrt(mean((y - yhat)^2))."""
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise TreeError(f"length mismatch: {y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise TreeError("rmse of an empty vector is undefined")
    r = y - yhat
    return float(np.sqrt(np.dot(r, r) / y.size))
