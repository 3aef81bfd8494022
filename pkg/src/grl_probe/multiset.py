"""Collision witnesses for mean/max neighborhood aggregators.

Aggregation uses the identity as the element-wise map, so a collision means
the aggregated vectors themselves agree.
"""

from __future__ import annotations

import itertools
from collections import Counter

import numpy as np

from .graph import Graph

TOL = 1e-12
AGGREGATORS = ("mean", "max", "sum")


class Multiset:
    """A bag of real vectors (rows of ``elements``)."""

    def __init__(self, elements):
        arr = np.asarray(elements, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("elements must be a list of vectors")
        self.elements = arr

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"Multiset({self.elements.tolist()})"

    def multiplicities(self) -> Counter:
        return Counter(tuple(row) for row in self.elements.tolist())

    def support(self) -> set:
        return set(self.multiplicities())

    def __eq__(self, other):
        return isinstance(other, Multiset) and self.multiplicities() == other.multiplicities()

    def aggregate(self, how: str) -> np.ndarray:
        if len(self) == 0:
            raise ValueError("cannot aggregate an empty multiset")
        return aggregate(self.elements, how)


def aggregate(rows, how: str) -> np.ndarray:
    if how == "mean":
        return rows.mean(axis=0)
    if how == "max":
        return rows.max(axis=0)
    if how == "sum":
        return rows.sum(axis=0)
    raise ValueError(f"unknown aggregator {how!r}")


def collides(x1: Multiset, x2: Multiset, how: str, tol: float = TOL) -> bool:
    return bool(np.max(np.abs(x1.aggregate(how) - x2.aggregate(how))) <= tol)


def mean_collision_witness(x1: Multiset, k: int) -> Multiset:
    """``k`` copies of every element: same support, same mean."""
    if len(x1) == 0:
        raise ValueError("X1 must be nonempty")
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    return Multiset(np.repeat(x1.elements, int(k), axis=0))


def max_collision_witness(x1: Multiset, multiplicities) -> Multiset:
    """Repeat element i of ``x1`` ``multiplicities[i]`` times; the max is unchanged."""
    if len(x1) == 0:
        raise ValueError("X1 must be nonempty")
    mult = np.asarray(multiplicities)
    if mult.shape != (len(x1),):
        raise ValueError("one multiplicity per element is required")
    if np.any(mult < 1) or np.any(mult != np.round(mult)):
        raise ValueError("multiplicities must be integers >= 1")
    return Multiset(np.repeat(x1.elements, mult.astype(np.int64), axis=0))


def _canonical(rows) -> bytes:
    rows = np.ascontiguousarray(rows)
    order = np.lexsort(rows.T[::-1]) if rows.shape[1] else np.arange(len(rows))
    return rows[order].tobytes() + len(rows).to_bytes(8, "little")


def neighborhood_collision_rate(g: Graph, features, aggregator: str, tol: float = TOL) -> float:
    """Share of node pairs with different neighbor-feature multisets whose aggregates agree.

    Isolated nodes are left out. Returns 0 when no pair qualifies.
    """
    if aggregator not in AGGREGATORS:
        raise ValueError(f"unknown aggregator {aggregator!r}")
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if len(X) != g.num_nodes:
        raise ValueError("one feature vector per node is required")
    nodes = np.flatnonzero(g.degrees() > 0)
    if len(nodes) < 2:
        return 0.0
    agg = np.empty((len(nodes), X.shape[1]))
    keys = {}
    ids = np.empty(len(nodes), dtype=np.int64)
    for i, v in enumerate(nodes):
        rows = X[g.neighbors(v)]
        agg[i] = aggregate(rows, aggregator)
        ids[i] = keys.setdefault(_canonical(rows), len(keys))
    sizes = np.bincount(ids)
    n = len(nodes)
    distinct_pairs = n * (n - 1) // 2 - int((sizes * (sizes - 1) // 2).sum())
    if distinct_pairs == 0:
        return 0.0
    hits = 0
    chunk = max(1, 4_000_000 // max(1, n * X.shape[1]))
    for lo in range(0, n, chunk):
        a = agg[lo:lo + chunk]
        close = np.ones((len(a), n), dtype=bool)
        for j in range(X.shape[1]):
            close &= np.abs(a[:, j][:, None] - agg[:, j][None, :]) <= tol
        close &= ids[lo:lo + chunk][:, None] != ids[None, :]
        rows = np.arange(lo, lo + len(a))[:, None]
        hits += int((close & (np.arange(n)[None, :] > rows)).sum())
    return hits / distinct_pairs


def degree_onehot(g: Graph) -> np.ndarray:
    deg = g.degrees()
    out = np.zeros((g.num_nodes, int(deg.max(initial=0)) + 1))
    out[np.arange(g.num_nodes), deg] = 1.0
    return out


def _multisets(alphabet: int, max_size: int):
    for size in range(1, max_size + 1):
        yield from itertools.combinations_with_replacement(range(alphabet), size)


def exhaustive_check(alphabet: int = 3, max_size: int = 4) -> dict:
    """Compare aggregator collisions with the combinatorial rule on every pair.

    Symbols are standard basis vectors. Mean should collide exactly when the
    multiplicity vectors are proportional, max exactly when the supports match.
    """
    basis = np.eye(alphabet)
    bags = list(_multisets(alphabet, max_size))
    counts = [np.bincount(b, minlength=alphabet) for b in bags]
    sets = [Multiset(basis[list(b)]) for b in bags]
    report = {"multisets": len(bags), "pairs": 0,
              "mean": {"collisions": 0, "mismatches": 0},
              "max": {"collisions": 0, "mismatches": 0},
              "sum": {"collisions": 0, "mismatches": 0}}
    for i, j in itertools.combinations(range(len(bags)), 2):
        report["pairs"] += 1
        ci, cj = counts[i], counts[j]
        expect = {
            # proportional iff ci * |cj| == cj * |ci| elementwise
            "mean": bool(np.all(ci * cj.sum() == cj * ci.sum())),
            "max": bool(np.array_equal(ci > 0, cj > 0)),
            "sum": False,
        }
        for how, exp in expect.items():
            got = collides(sets[i], sets[j], how)
            report[how]["collisions"] += got
            report[how]["mismatches"] += got != exp
    return report


def witness_report(seed: int = 0, trials: int = 50, dim: int = 4) -> dict:
    """Random witnesses: each must collide for its aggregator and split under sum."""
    rng = np.random.default_rng(seed)
    out = {"mean": {"witnesses": 0, "collide": 0, "sum_separates": 0},
           "max": {"witnesses": 0, "collide": 0, "sum_separates": 0}}
    for _ in range(trials):
        x1 = Multiset(rng.normal(size=(int(rng.integers(1, 6)), dim)))
        pairs = [("mean", mean_collision_witness(x1, int(rng.integers(2, 5)))),
                 ("max", max_collision_witness(x1, rng.integers(1, 4, len(x1)) + (rng.random(len(x1)) < 0.5)))]
        for how, x2 in pairs:
            if x2 == x1:
                continue
            out[how]["witnesses"] += 1
            out[how]["collide"] += collides(x1, x2, how)
            out[how]["sum_separates"] += not collides(x1, x2, "sum")
    return out
