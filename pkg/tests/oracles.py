"""Slow reference implementations used only by the tests."""

import itertools
from collections import deque

import numpy as np


def adj_sets(g):
    return [set(g.neighbors(u).tolist()) for u in range(g.num_nodes)]


def brute_triangles(g):
    a = g.adjacency().toarray().astype(bool)
    n = g.num_nodes
    t = np.zeros(n, dtype=np.int64)
    for i, j, k in itertools.combinations(range(n), 3):
        if a[i, j] and a[j, k] and a[i, k]:
            t[[i, j, k]] += 1
    return t


def brute_clustering(g):
    adj = adj_sets(g)
    out = np.zeros(g.num_nodes)
    for u, nb in enumerate(adj):
        pairs = list(itertools.combinations(sorted(nb), 2))
        if pairs:
            out[u] = sum(b in adj[a] for a, b in pairs) / len(pairs)
    return out


def brute_transitivity(g):
    adj = adj_sets(g)
    closed = triples = 0
    for u, nb in enumerate(adj):
        for a, b in itertools.combinations(sorted(nb), 2):
            triples += 1
            closed += b in adj[a]
    return closed / triples if triples else 0.0


def bfs_dist(g, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        u = q.popleft()
        for v in g.neighbors(u):
            v = int(v)
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def brute_closeness(g):
    n = g.num_nodes
    out = np.zeros(n)
    for u in range(n):
        d = bfs_dist(g, u)
        r, tot = len(d), sum(d.values())
        if tot > 0 and n > 1:
            out[u] = (r - 1) ** 2 / ((n - 1) * tot)
    return out


def brute_modularity(g, labels):
    a = g.adjacency().toarray()
    k = a.sum(1)
    m2 = k.sum()
    same = labels[:, None] == labels[None, :]
    return float(((a - np.outer(k, k) / m2) * same).sum() / m2)


def brute_auc(pos, neg):
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def cart_best_split(X, y, classification):
    """Exhaustive search over every feature and midpoint threshold."""
    def impurity(v):
        if len(v) == 0:
            return 0.0
        if classification:
            _, c = np.unique(v, return_counts=True)
            return len(v) * (1.0 - ((c / len(v)) ** 2).sum())
        return ((v - v.mean()) ** 2).sum()

    parent = impurity(y)
    best = (0.0, None, None)
    for f in range(X.shape[1]):
        vals = np.unique(X[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = (lo + hi) / 2
            left = X[:, f] <= thr
            gain = parent - impurity(y[left]) - impurity(y[~left])
            if gain > best[0] + 1e-12:
                best = (gain, f, thr)
    return best


def cart_tree(X, y, depth, classification):
    """Nested tuples (feature, threshold, left, right) or a leaf value."""
    gain, f, thr = cart_best_split(X, y, classification) if depth > 0 and len(y) >= 2 else (0, None, None)
    if f is None:
        if classification:
            vals, c = np.unique(y, return_counts=True)
            return int(vals[np.argmax(c)])
        return float(y.mean())
    left = X[:, f] <= thr
    return (f, thr, cart_tree(X[left], y[left], depth - 1, classification),
            cart_tree(X[~left], y[~left], depth - 1, classification))


def numeric_grad(f, x, h=1e-6):
    """Central differences of scalar ``f()`` with respect to array ``x`` (edited in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        up = f()
        x[i] = old - h
        dn = f()
        x[i] = old
        g[i] = (up - dn) / (2 * h)
    return g


def rel_err(num, ana):
    return np.linalg.norm(num - ana) / max(np.linalg.norm(num) + np.linalg.norm(ana), 1e-12)
