"""CART regression trees on weighted rows.

A bootstrap sample is passed as per-row multiplicities rather than as a
materialised copy of the data, so a tree grown on a 10x oversample costs
about the same as one grown on the distinct rows it contains. Every
count-based rule (``min_samples_split``, ``min_samples_leaf``) counts rows
with their multiplicity.

Nodes are stored as flat arrays in preorder; ``feature[i] == -1`` marks a
leaf.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DomainError
from .sampling import SeededRng

LEAF = -1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@numba.njit(cache=True, nogil=True)
def _splitmix_next(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True)
def _randbelow(state, k):
    u = (_splitmix_next(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    return min(int(u * k), k - 1)


@numba.njit(cache=True, nogil=True)
def _grow(X, y, w, rows, max_depth, min_split, min_leaf, n_candidates, seed):
    n_rows = rows.shape[0]
    p = X.shape[1]
    cap = 2 * n_rows + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)
    count = np.zeros(cap)

    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_parent = np.empty(cap, dtype=np.int64)
    st_isleft = np.empty(cap, dtype=np.bool_)
    st_start[0] = 0
    st_end[0] = n_rows
    st_depth[0] = 0
    st_parent[0] = -1
    st_isleft[0] = False
    top = 1

    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    order_buf = np.arange(p)
    part = np.empty(n_rows, dtype=np.int64)
    n_nodes = 0

    while top > 0:
        top -= 1
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        parent = st_parent[top]
        node = n_nodes
        n_nodes += 1
        if parent >= 0:
            if st_isleft[top]:
                left[parent] = node
            else:
                right[parent] = node

        wsum = 0.0
        s = 0.0
        ss = 0.0
        ymin = np.inf
        ymax = -np.inf
        for i in range(start, end):
            r = rows[i]
            wsum += w[r]
            s += w[r] * y[r]
            ss += w[r] * y[r] * y[r]
            ymin = min(ymin, y[r])
            ymax = max(ymax, y[r])
        # a pure node stores its target exactly rather than a rounded mean
        value[node] = ymin if ymin == ymax else s / wsum
        count[node] = wsum

        if (
            (max_depth >= 0 and depth >= max_depth)
            or wsum < min_split
            or wsum < 2 * min_leaf
            or ymin == ymax
        ):
            continue

        tol = 1e-12 * ss
        best_gain = -np.inf
        best_f = -1
        best_thr = 0.0
        parent_term = s * s / wsum

        if n_candidates < p:
            for i in range(p):
                order_buf[i] = i
        visited = 0
        for j in range(p):
            if n_candidates < p:
                if visited >= n_candidates:
                    break
                k = j + _randbelow(state, p - j)
                tmp = order_buf[j]
                order_buf[j] = order_buf[k]
                order_buf[k] = tmp
                f = order_buf[j]
            else:
                f = j
            m = end - start
            vals = np.empty(m)
            for i in range(m):
                vals[i] = X[rows[start + i], f]
            o = np.argsort(vals, kind="mergesort")
            if vals[o[0]] == vals[o[m - 1]]:
                continue
            visited += 1
            wl = 0.0
            sl = 0.0
            for i in range(m - 1):
                r = rows[start + o[i]]
                wl += w[r]
                sl += w[r] * y[r]
                v0 = vals[o[i]]
                v1 = vals[o[i + 1]]
                if v0 == v1:
                    continue
                wr = wsum - wl
                if wl < min_leaf or wr < min_leaf:
                    continue
                sr = s - sl
                gain = sl * sl / wl + sr * sr / wr - parent_term
                thr = 0.5 * (v0 + v1)
                if thr == v1 or not (thr > v0):
                    thr = v0
                better = False
                if gain > best_gain + tol:
                    better = True
                elif gain >= best_gain - tol:
                    if f < best_f or (f == best_f and thr < best_thr):
                        better = True
                if better:
                    best_gain = gain
                    best_f = f
                    best_thr = thr

        if best_f < 0:
            continue

        feature[node] = best_f
        threshold[node] = best_thr
        nl = 0
        nr = 0
        for i in range(start, end):
            r = rows[i]
            if X[r, best_f] <= best_thr:
                rows[start + nl] = r
                nl += 1
            else:
                part[nr] = r
                nr += 1
        for i in range(nr):
            rows[start + nl + i] = part[i]
        mid = start + nl

        # right first so the left child is popped next (preorder ids)
        st_start[top] = mid
        st_end[top] = end
        st_depth[top] = depth + 1
        st_parent[top] = node
        st_isleft[top] = False
        top += 1
        st_start[top] = start
        st_end[top] = mid
        st_depth[top] = depth + 1
        st_parent[top] = node
        st_isleft[top] = True
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        count[:n_nodes].copy(),
    )


@numba.njit(cache=True, nogil=True)
def _apply(feature, threshold, left, right, X, out):
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node


@numba.njit(cache=True, nogil=True)
def _predict(feature, threshold, left, right, value, X, out):
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str = "all"
    rng_stream: int = 0

    def __post_init__(self):
        if self.min_samples_split < 2:
            raise DomainError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise DomainError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise DomainError("max_depth must be >= 1 or None")
        if self.max_features not in ("all", "log2"):
            raise DomainError(f"max_features must be 'all' or 'log2', got {self.max_features!r}")

    def n_candidates(self, n_features: int) -> int:
        if self.max_features == "log2":
            return max(1, int(math.floor(math.log2(n_features))))
        return n_features


@dataclass(frozen=True, eq=False)
class RegressionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray
    n_features: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def _check(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got {X.shape[1]}")
        if not np.all(np.isfinite(X)):
            raise DomainError("feature values must be finite")
        return X

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        out = np.empty(X.shape[0])
        _predict(self.feature, self.threshold, self.left, self.right, self.value, X, out)
        return out

    def apply(self, X) -> np.ndarray:
        """Leaf node id reached by every row of ``X``."""
        X = self._check(X)
        out = np.empty(X.shape[0], dtype=np.int64)
        _apply(self.feature, self.threshold, self.left, self.right, X, out)
        return out

    def to_dict(self) -> dict:
        nodes = []
        for i in range(self.n_nodes):
            if self.feature[i] == LEAF:
                nodes.append({"id": i, "value": float(self.value[i]), "count": float(self.count[i])})
            else:
                nodes.append({
                    "id": i,
                    "feature": int(self.feature[i]),
                    "threshold": float(self.threshold[i]),
                    "left": int(self.left[i]),
                    "right": int(self.right[i]),
                })
        return {"n_features": self.n_features, "nodes": nodes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def fit_tree(X, y, config: TreeConfig = TreeConfig(), rng: SeededRng | None = None,
             counts=None) -> RegressionTree:
    """Grow a tree on the rows of ``(X, y)`` weighted by ``counts``.

    ``counts[i]`` is how many times row ``i`` was drawn; rows with zero
    count are ignored. Without ``counts`` every row is used once. ``rng``
    is only consulted when ``config.max_features`` draws a feature subset.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DomainError(f"shape mismatch: X {X.shape}, y {y.shape}")
    if X.shape[1] < 1:
        raise DomainError("need at least one feature")
    if counts is None:
        w = np.ones(X.shape[0])
    else:
        w = np.ascontiguousarray(counts, dtype=np.float64)
        if w.shape != y.shape or np.any(w < 0):
            raise DomainError("counts must be non-negative, one per row")
    rows = np.flatnonzero(w > 0).astype(np.int64)
    if rows.size == 0:
        raise DomainError("cannot fit a tree on zero rows")
    if not (np.all(np.isfinite(X[rows])) and np.all(np.isfinite(y[rows]))):
        raise DomainError("training data must be finite")

    seed = 0
    if rng is not None:
        seed = rng.child(config.rng_stream).seed64()
    max_depth = -1 if config.max_depth is None else config.max_depth
    arrays = _grow(X, y, w, rows, max_depth, float(config.min_samples_split),
                   float(config.min_samples_leaf), config.n_candidates(X.shape[1]),
                   np.uint64(seed))
    return RegressionTree(*arrays, n_features=X.shape[1])


def predict_tree(tree: RegressionTree, x) -> float:
    """Prediction for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DomainError("predict_tree expects one feature vector")
    return float(tree.predict(x.reshape(1, -1))[0])
