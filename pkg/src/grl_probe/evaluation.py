"""Edge/node splits, link-prediction AUC and property-prediction tasks."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .forest import DEPTH_GRID, N_TREES_GRID, ForestConfig, RandomForest, config_record
from .graph import Graph, GraphError

logger = logging.getLogger(__name__)

TASKS = ("link_prediction", "degree", "avg_neighbor_degree", "triangles",
         "clustering_coefficient", "closeness", "community")
PROPERTY_TASKS = TASKS[1:]
LOG_TARGETS = ("degree", "avg_neighbor_degree", "triangles")
METRIC = {"link_prediction": "AUC", "community": "MicroF1"}


class TaskSkipped(Exception):
    pass


@dataclass(frozen=True)
class SplitSpec:
    kind: str = "edge"
    train_fraction: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("edge", "node"):
            raise ValueError("split kind must be 'edge' or 'node'")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")


@dataclass
class EdgeSplit:
    train: Graph
    positives: np.ndarray
    negatives: np.ndarray


@dataclass
class TaskResult:
    task: str
    metric: str
    value: float
    config: str = ""
    seed: int = 0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.metric in ("AUC", "MicroF1") and np.isfinite(self.value):
            assert 0.0 <= self.value <= 1.0, self.value
        if self.metric == "R2" and np.isfinite(self.value):
            assert self.value <= 1.0 + 1e-12, self.value


def edge_split(g: Graph, spec: SplitSpec = SplitSpec()) -> EdgeSplit:
    """Hold out ``floor((1 - train_fraction) |E|)`` edges plus as many non-edges.

    Edges are visited in a seeded uniform order and skipped when removing
    them would isolate an endpoint. Negatives are distinct uniform
    non-adjacent pairs; a graph with too few non-edges yields fewer
    negatives (logged).
    """
    if g.num_edges < 10:
        raise GraphError("edge split needs at least 10 edges")
    rng = np.random.default_rng(spec.seed)
    k = int(np.floor((1.0 - spec.train_fraction) * g.num_edges + 1e-9))
    deg = g.degrees().copy()
    held = []
    for i in rng.permutation(g.num_edges):
        if len(held) == k:
            break
        u, v = g.edges[i]
        if deg[u] > 1 and deg[v] > 1:
            deg[u] -= 1
            deg[v] -= 1
            held.append(i)
    if len(held) < k:
        raise GraphError(f"only {len(held)} of {k} edges can be held out without isolating a node")
    positives = g.edges[np.sort(held)]
    n = g.num_nodes
    max_neg = n * (n - 1) // 2 - g.num_edges
    want = min(k, max_neg)
    if want < k:
        logger.warning("only %d non-adjacent pairs available for %d positives", max_neg, k)
    existing = set((g.edges[:, 0] * n + g.edges[:, 1]).tolist())
    chosen = []
    seen = set()
    if want and max_neg <= 4 * want:
        # dense graph: enumerate non-edges and choose among them
        iu, ju = np.triu_indices(n, 1)
        key = iu * n + ju
        free = key[~np.isin(key, list(existing))]
        chosen = rng.choice(free, size=want, replace=False).tolist()
    else:
        while len(chosen) < want:
            u, v = rng.integers(0, n, 2)
            if u == v:
                continue
            a, b = (u, v) if u < v else (v, u)
            key = int(a) * n + int(b)
            if key in existing or key in seen:
                continue
            seen.add(key)
            chosen.append(key)
    chosen = np.array(chosen, dtype=np.int64)
    negatives = np.stack([chosen // n, chosen % n], axis=1) if len(chosen) else np.zeros((0, 2), np.int64)
    return EdgeSplit(g.with_edges_removed(positives), positives, negatives)


def node_split(n: int, spec: SplitSpec, node_ids=None):
    """Train/test node positions; membership depends on node ids, not row order."""
    ids = np.arange(n) if node_ids is None else np.asarray(node_ids)
    rng = np.random.default_rng(spec.seed)
    canon = np.argsort(ids, kind="stable")
    perm = rng.permutation(n)
    n_test = max(1, int(round((1.0 - spec.train_fraction) * n)))
    # rows come back in id order so downstream fits ignore input order
    return canon[np.sort(perm[n_test:])], canon[np.sort(perm[:n_test])]


def pair_scores(vectors, pairs):
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return (vectors[pairs[:, 0]] * vectors[pairs[:, 1]]).sum(axis=1)


def auc_from_scores(pos, neg) -> float:
    """P(pos > neg) with ties counted one half, via the rank-sum statistic."""
    pos = np.asarray(pos, dtype=np.float64)
    neg = np.asarray(neg, dtype=np.float64)
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("AUC needs positive and negative scores")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[:len(pos)].sum() - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


def link_prediction_auc(embeddings, positives, negatives) -> float:
    vec = getattr(embeddings, "vectors", embeddings)
    return auc_from_scores(pair_scores(vec, positives), pair_scores(vec, negatives))


def r2(y_true, y_pred) -> float:
    """Coefficient of determination; 0 when the truth has zero variance."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape:
        raise ValueError("length mismatch")
    if len(y_true) == 0:
        raise ValueError("empty input")
    ss_tot = ((y_true - y_true.mean()) ** 2).sum()
    if ss_tot == 0:
        return 0.0
    return float(1.0 - ((y_true - y_pred) ** 2).sum() / ss_tot)


def micro_f1(y_true, y_pred) -> float:
    """F1 from true/false positives pooled over all classes."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("length mismatch")
    if len(y_true) == 0:
        raise ValueError("empty input")
    tp = fp = fn = 0
    for c in np.union1d(y_true, y_pred):
        t, p = y_true == c, y_pred == c
        tp += int((t & p).sum())
        fp += int((~t & p).sum())
        fn += int((t & ~p).sum())
    return tp / (tp + 0.5 * (fp + fn)) if tp + fp + fn else 1.0


@dataclass(frozen=True)
class ForestGrid:
    n_trees: tuple = N_TREES_GRID
    depths: tuple = DEPTH_GRID
    seed: int = 0
    feature_subset: str = "auto"
    min_samples_split: int = 2


def fingerprint(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def property_task(embeddings, table, task: str, grid: ForestGrid = ForestGrid(),
                  spec: SplitSpec = SplitSpec(kind="node"), node_ids=None) -> TaskResult:
    """Fit forests on a 90/10 node split and report the best held-out score.

    One forest with the largest tree count and depth is grown; smaller grid
    points are read from it exactly (tree prefixes, depth caps).
    """
    if task not in PROPERTY_TASKS:
        raise ValueError(f"unknown property task {task!r}")
    X = np.asarray(getattr(embeddings, "vectors", embeddings), dtype=np.float64)
    y = np.asarray(table.column(task))
    n = len(X)
    train, test = node_split(n, spec, node_ids)
    classification = task == "community"
    details = {"forest": config_record(ForestConfig(max(grid.n_trees), max(grid.depths),
                                                     grid.min_samples_split, grid.feature_subset,
                                                     True, grid.seed), X.shape[1], classification)}
    if classification:
        if len(np.unique(y)) < 2:
            raise TaskSkipped("community task needs at least two communities")
        target = y
    else:
        target = np.log1p(y.astype(np.float64)) if task in LOG_TARGETS else y.astype(np.float64)
        details["log1p_target"] = task in LOG_TARGETS
        if task == "triangles":
            details["deviation"] = "triangle target log1p-transformed"
    cfg = ForestConfig(max(grid.n_trees), max(grid.depths), grid.min_samples_split,
                       grid.feature_subset, True, grid.seed)
    model = RandomForest(cfg, classification).fit(X[train], target[train])
    scores = {}
    for k in sorted(grid.n_trees):
        for depth in sorted(grid.depths):
            pred = model.predict(X[test], n_trees=k, max_depth=depth)
            scores[f"{k}x{depth}"] = micro_f1(target[test], pred) if classification else r2(target[test], pred)
    best_key = max(scores, key=lambda s: (scores[s], -list(scores).index(s)))
    details.update(grid_scores=scores, best=best_key, n_train=len(train), n_test=len(test))
    return TaskResult(task, "MicroF1" if classification else "R2", scores[best_key],
                      fingerprint(details["forest"]), spec.seed, details)
