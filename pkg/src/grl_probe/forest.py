"""CART random forests (regression and classification) grown in numba.

Every node draws its candidate features from a random stream keyed by the
tree seed and the node's path from the root. Splits therefore depend only
on the node's samples and position, so a tree grown to depth 12 and read
only down to depth 8 is exactly the tree that would have been grown with
``max_depth=8``. :meth:`RandomForest.predict` exposes that through its
``max_depth`` and ``n_trees`` arguments, which makes the estimator x depth
grid one fit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numba as nb
import numpy as np

from . import _rng

logger = logging.getLogger(__name__)

N_TREES_GRID = (100, 300, 500)
DEPTH_GRID = (8, 10, 12)


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 8
    min_samples_split: int = 2
    feature_subset: str = "auto"  # auto | sqrt | third | all
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1:
            raise ValueError("n_trees and max_depth must be >= 1")
        if self.feature_subset not in ("auto", "sqrt", "third", "all"):
            raise ValueError(f"unknown feature_subset {self.feature_subset!r}")

    def n_features(self, d, classification):
        rule = self.feature_subset
        if rule == "auto":
            rule = "sqrt" if classification else "third"
        if rule == "sqrt":
            return max(1, int(math.sqrt(d)))
        if rule == "third":
            return max(1, d // 3)
        return d


@nb.njit(cache=True)
def _child_key(key, side):
    return _rng.mix64(key * np.uint64(2) + np.uint64(side + 1))


@nb.njit(cache=True)
def _impurity_sums(y, idx, lo, hi, n_classes, counts):
    # returns impurity * n for the node (SSE or Gini * n)
    n = hi - lo
    if n_classes == 0:
        s = 0.0
        s2 = 0.0
        for t in range(lo, hi):
            v = y[idx[t]]
            s += v
            s2 += v * v
        return s2 - s * s / n
    counts[:] = 0.0
    for t in range(lo, hi):
        counts[np.int64(y[idx[t]])] += 1.0
    sq = 0.0
    for c in range(n_classes):
        sq += counts[c] * counts[c]
    return n - sq / n


@nb.njit(cache=True)
def _grow(X, y, samples, max_depth, min_split, mtry, key, n_classes):
    n = len(samples)
    d = X.shape[1]
    cap = 2 * n + 1
    feat = np.full(cap, -1, dtype=np.int64)
    thr = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    out_w = max(n_classes, 1)
    value = np.zeros((cap, out_w))
    idx = samples.copy()
    # stack of (node, lo, hi, depth, key)
    st_node = np.empty(cap, dtype=np.int64)
    st_lo = np.empty(cap, dtype=np.int64)
    st_hi = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_key = np.empty(cap, dtype=np.uint64)
    counts = np.zeros(out_w)
    lc = np.zeros(out_w)
    rc = np.zeros(out_w)
    feats = np.arange(d)
    vals = np.empty(n)
    state = np.empty(1, dtype=np.uint64)
    n_nodes = 1
    sp = 0
    st_node[0] = 0
    st_lo[0] = 0
    st_hi[0] = n
    st_depth[0] = 0
    st_key[0] = key
    sp = 1
    while sp > 0:
        sp -= 1
        node = st_node[sp]
        lo = st_lo[sp]
        hi = st_hi[sp]
        depth = st_depth[sp]
        nkey = st_key[sp]
        m = hi - lo
        parent_imp = _impurity_sums(y, idx, lo, hi, n_classes, counts)
        if n_classes == 0:
            s = 0.0
            for t in range(lo, hi):
                s += y[idx[t]]
            value[node, 0] = s / m
        else:
            for c in range(n_classes):
                value[node, c] = counts[c] / m
        if depth >= max_depth or m < min_split or parent_imp <= 1e-12:
            continue
        # candidate features: partial Fisher-Yates on the node stream
        state[0] = nkey
        for i in range(d):
            feats[i] = i
        for i in range(mtry):
            j = i + _rng.next_below(state, d - i)
            tmp = feats[i]
            feats[i] = feats[j]
            feats[j] = tmp
        # scan candidates in index order so gain ties go to the lowest feature
        feats[:mtry] = np.sort(feats[:mtry])
        best_gain = 1e-12
        best_f = -1
        best_t = 0.0
        for fi in range(mtry):
            f = feats[fi]
            for t in range(m):
                vals[t] = X[idx[lo + t], f]
            order = np.argsort(vals[:m], kind="mergesort")
            if n_classes == 0:
                tot = 0.0
                tot2 = 0.0
                for t in range(m):
                    v = y[idx[lo + order[t]]]
                    tot += v
                    tot2 += v * v
                ls = 0.0
                ls2 = 0.0
                for t in range(m - 1):
                    v = y[idx[lo + order[t]]]
                    ls += v
                    ls2 += v * v
                    a = vals[order[t]]
                    b = vals[order[t + 1]]
                    if b <= a:
                        continue
                    nl = t + 1
                    nr = m - nl
                    rs = tot - ls
                    rs2 = tot2 - ls2
                    child = (ls2 - ls * ls / nl) + (rs2 - rs * rs / nr)
                    gain = parent_imp - child
                    if gain > best_gain:
                        best_gain = gain
                        best_f = f
                        best_t = 0.5 * (a + b)
            else:
                lc[:] = 0.0
                for c in range(n_classes):
                    rc[c] = counts[c]
                for t in range(m - 1):
                    c = np.int64(y[idx[lo + order[t]]])
                    lc[c] += 1.0
                    rc[c] -= 1.0
                    a = vals[order[t]]
                    b = vals[order[t + 1]]
                    if b <= a:
                        continue
                    nl = t + 1
                    nr = m - nl
                    sl = 0.0
                    sr = 0.0
                    for k in range(n_classes):
                        sl += lc[k] * lc[k]
                        sr += rc[k] * rc[k]
                    child = (nl - sl / nl) + (nr - sr / nr)
                    gain = parent_imp - child
                    if gain > best_gain:
                        best_gain = gain
                        best_f = f
                        best_t = 0.5 * (a + b)
        if best_f < 0:
            continue
        # partition idx[lo:hi] in place
        i = lo
        j = hi - 1
        while i <= j:
            if X[idx[i], best_f] <= best_t:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        feat[node] = best_f
        thr[node] = best_t
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        st_node[sp] = rnode
        st_lo[sp] = i
        st_hi[sp] = hi
        st_depth[sp] = depth + 1
        st_key[sp] = _child_key(nkey, 1)
        sp += 1
        st_node[sp] = lnode
        st_lo[sp] = lo
        st_hi[sp] = i
        st_depth[sp] = depth + 1
        st_key[sp] = _child_key(nkey, 0)
        sp += 1
    return feat[:n_nodes], thr[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


@nb.njit(cache=True)
def _route(feat, thr, left, right, root, x, max_depth):
    node = root
    depth = 0
    while left[node] >= 0 and depth < max_depth:
        if x[feat[node]] <= thr[node]:
            node = left[node]
        else:
            node = right[node]
        depth += 1
    return node


@nb.njit(cache=True)
def _predict(X, feat, thr, left, right, value, roots, n_trees, max_depth, n_classes):
    n = X.shape[0]
    if n_classes == 0:
        out = np.zeros(n)
        for i in range(n):
            s = 0.0
            for t in range(n_trees):
                s += value[_route(feat, thr, left, right, roots[t], X[i], max_depth), 0]
            out[i] = s / n_trees
        return out
    out = np.zeros(n)
    votes = np.zeros(n_classes)
    for i in range(n):
        votes[:] = 0.0
        for t in range(n_trees):
            node = _route(feat, thr, left, right, roots[t], X[i], max_depth)
            # a tree votes its majority class; ties go to the smallest id
            best = 0
            for c in range(1, n_classes):
                if value[node, c] > value[node, best]:
                    best = c
            votes[best] += 1.0
        best = 0
        for c in range(1, n_classes):
            if votes[c] > votes[best]:
                best = c
        out[i] = best
    return out


def _check_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("empty training data")
    if len(y) != X.shape[0]:
        raise ValueError("X and y lengths differ")
    if not np.isfinite(X).all():
        raise ValueError("non-finite feature values")
    return X


class RandomForest:
    """Bagged CART trees; ``classification`` picks Gini + plurality vote."""

    def __init__(self, config: ForestConfig | None = None, classification: bool = False):
        self.config = config or ForestConfig()
        self.classification = classification
        self.classes_ = None

    def fit(self, X, y):
        X = _check_xy(X, y)
        y = np.asarray(y)
        n, d = X.shape
        cfg = self.config
        if self.classification:
            self.classes_, yc = np.unique(y, return_inverse=True)
            n_classes = len(self.classes_)
            if n_classes < 2:
                logger.warning("single-class training set; forest predicts %r", self.classes_[0])
            yv = yc.astype(np.float64)
        else:
            yv = np.asarray(y, dtype=np.float64)
            if not np.isfinite(yv).all():
                raise ValueError("non-finite targets")
            n_classes = 0
        if n < 2:
            raise ValueError("need at least two samples")
        mtry = cfg.n_features(d, self.classification)
        rng = np.random.default_rng(cfg.seed)
        parts = []
        for _ in range(cfg.n_trees):
            samples = rng.integers(0, n, n) if cfg.bootstrap else np.arange(n)
            key = np.uint64(rng.integers(0, 2**63))
            parts.append(_grow(X, yv, samples.astype(np.int64), cfg.max_depth,
                               cfg.min_samples_split, mtry, key, n_classes))
        sizes = np.array([len(p[0]) for p in parts])
        self.roots_ = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        offs = self.roots_
        self.feat_ = np.concatenate([p[0] for p in parts])
        self.thr_ = np.concatenate([p[1] for p in parts])
        self.left_ = np.concatenate([np.where(p[2] >= 0, p[2] + o, -1) for p, o in zip(parts, offs)])
        self.right_ = np.concatenate([np.where(p[3] >= 0, p[3] + o, -1) for p, o in zip(parts, offs)])
        self.value_ = np.vstack([p[4] for p in parts])
        self.n_classes_ = n_classes
        self.n_features_ = d
        return self

    def predict(self, X, n_trees=None, max_depth=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise ValueError("feature count differs from training data")
        k = self.config.n_trees if n_trees is None else int(n_trees)
        if not 1 <= k <= self.config.n_trees:
            raise ValueError(f"n_trees must be in [1, {self.config.n_trees}]")
        depth = self.config.max_depth if max_depth is None else min(int(max_depth), self.config.max_depth)
        out = _predict(X, self.feat_, self.thr_, self.left_, self.right_, self.value_,
                       self.roots_, k, depth, self.n_classes_)
        if self.classification:
            return self.classes_[out.astype(np.int64)]
        return out

    def tree_structure(self, t=0):
        """(feature, threshold, left, right) arrays of tree ``t``, local node ids."""
        lo = self.roots_[t]
        hi = self.roots_[t + 1] if t + 1 < len(self.roots_) else len(self.feat_)
        loc = lambda a: np.where(a >= 0, a - lo, -1)  # noqa: E731
        return self.feat_[lo:hi], self.thr_[lo:hi], loc(self.left_[lo:hi]), loc(self.right_[lo:hi])


def fit_regressor(X, y, config: ForestConfig | None = None) -> RandomForest:
    return RandomForest(config, classification=False).fit(X, y)


def fit_classifier(X, y, config: ForestConfig | None = None) -> RandomForest:
    return RandomForest(config, classification=True).fit(X, y)


def config_record(config: ForestConfig, d: int, classification: bool) -> dict:
    rec = asdict(config)
    rec["features_per_split"] = config.n_features(d, classification)
    return rec
