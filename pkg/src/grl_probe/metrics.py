"""Node- and graph-level topological properties, plus Louvain communities."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .graph import Graph


def avg_neighbor_degree(g: Graph) -> np.ndarray:
    deg = g.degrees().astype(np.float64)
    sums = g.adjacency() @ deg
    out = np.zeros(g.num_nodes)
    nz = deg > 0
    out[nz] = sums[nz] / deg[nz]
    return out


def triangle_counts(g: Graph) -> np.ndarray:
    """Triangles through each node, i.e. ``diag(A^3) / 2``."""
    a = g.adjacency()
    return np.asarray((a @ a).multiply(a).sum(axis=1)).ravel().astype(np.int64) // 2


def clustering_coefficients(g: Graph) -> np.ndarray:
    deg = g.degrees().astype(np.float64)
    tri = triangle_counts(g)
    out = np.zeros(g.num_nodes)
    ok = deg >= 2
    out[ok] = 2.0 * tri[ok] / (deg[ok] * (deg[ok] - 1))
    return out


def transitivity(g: Graph) -> float:
    deg = g.degrees().astype(np.float64)
    triples = float((deg * (deg - 1) / 2).sum())
    if triples == 0:
        return 0.0
    # each triangle is counted once at each of its three corners
    return float(triangle_counts(g).sum()) / triples


def avg_clustering(g: Graph) -> float:
    return float(clustering_coefficients(g).mean()) if g.num_nodes else 0.0


def density(g: Graph) -> float:
    n = g.num_nodes
    return 2.0 * g.num_edges / (n * (n - 1)) if n > 1 else 0.0


def closeness_centrality(g: Graph, chunk: int = 256) -> np.ndarray:
    """Component-corrected closeness.

    ``c(u) = (r-1)^2 / ((N-1) * sum of distances to the r-1 reachable
    nodes)``, where ``r`` counts ``u`` itself; isolated nodes score 0.
    """
    n = g.num_nodes
    out = np.zeros(n)
    if n <= 1:
        return out
    a = g.adjacency()
    for lo in range(0, n, chunk):
        idx = np.arange(lo, min(n, lo + chunk))
        dist = shortest_path(a, method="D", directed=False, unweighted=True, indices=idx)
        finite = np.isfinite(dist)
        reach = finite.sum(axis=1) - 1
        total = np.where(finite, dist, 0.0).sum(axis=1)
        ok = total > 0
        out[idx[ok]] = reach[ok] ** 2 / ((n - 1) * total[ok])
    return out


def modularity(g: Graph, partition) -> float:
    """Newman modularity at resolution 1."""
    if g.num_edges == 0:
        raise ValueError("modularity is undefined for an edgeless graph")
    labels = np.asarray(partition)
    _, lab = np.unique(labels, return_inverse=True)
    m = g.num_edges
    deg = g.degrees().astype(np.float64)
    vol = np.bincount(lab, weights=deg)
    same = lab[g.edges[:, 0]] == lab[g.edges[:, 1]]
    internal = np.bincount(lab[g.edges[same, 0]], minlength=len(vol))
    return float((internal / m).sum() - ((vol / (2.0 * m)) ** 2).sum())


def _one_level(nbrs, wts, k, m2, order, node_comm):
    """Local-move phase on a weighted graph given as adjacency lists.

    Returns True if any node changed community.
    """
    n = len(k)
    tot = np.bincount(node_comm, weights=k, minlength=n).astype(np.float64)
    moved_any = False
    while True:
        moved = 0
        for u in order:
            cu = node_comm[u]
            ku = k[u]
            links = {}
            for v, w in zip(nbrs[u], wts[u]):
                if v != u:
                    c = node_comm[v]
                    links[c] = links.get(c, 0.0) + w
            tot[cu] -= ku
            # gain of inserting u into c, up to a common constant
            best_c = cu
            best = links.get(cu, 0.0) - tot[cu] * ku / m2
            for c, w in links.items():
                gain = w - tot[c] * ku / m2
                if gain > best + 1e-12:
                    best, best_c = gain, c
            tot[best_c] += ku
            if best_c != cu:
                node_comm[u] = best_c
                moved += 1
        if not moved:
            break
        moved_any = True
    return moved_any


def louvain_communities(g: Graph, seed: int = 0, tol: float = 1e-7):
    """Two-phase Louvain at resolution 1.

    Node visit order is shuffled once per level with ``seed``; a node only
    leaves its community for a strictly better gain. Levels repeat until
    modularity improves by less than ``tol``. Returns contiguous community
    ids (ordered by smallest member) and the modularity of that partition.
    """
    if g.num_edges == 0:
        raise ValueError("louvain requires at least one edge")
    rng = np.random.default_rng(seed)
    m2 = 2.0 * g.num_edges
    # working weighted graph
    nbrs = [list(g.neighbors(u)) for u in range(g.num_nodes)]
    wts = [[1.0] * len(x) for x in nbrs]
    k = g.degrees().astype(np.float64)
    membership = np.arange(g.num_nodes)
    q = modularity(g, membership)
    while True:
        n = len(k)
        node_comm = np.arange(n)
        order = rng.permutation(n)
        if not _one_level(nbrs, wts, k, m2, order, node_comm):
            break
        _, node_comm = np.unique(node_comm, return_inverse=True)
        new_membership = node_comm[membership]
        new_q = modularity(g, new_membership)
        if new_q - q < tol:
            if new_q > q:
                membership, q = new_membership, new_q
            break
        membership, q = new_membership, new_q
        # contract communities into super-nodes
        nc = int(node_comm.max()) + 1
        agg = {}
        for u in range(n):
            cu = node_comm[u]
            for v, w in zip(nbrs[u], wts[u]):
                key = (cu, node_comm[v])
                agg[key] = agg.get(key, 0.0) + w
        nbrs = [[] for _ in range(nc)]
        wts = [[] for _ in range(nc)]
        for (a, b), w in sorted(agg.items()):
            nbrs[a].append(b)
            wts[a].append(w)
        k = np.bincount(node_comm, weights=k, minlength=nc)
    _, first = np.unique(membership, return_index=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    _, inv = np.unique(membership, return_inverse=True)
    labels = rank[inv]
    return labels, modularity(g, labels)


PROPERTY_COLUMNS = (
    "degree", "avg_neighbor_degree", "triangles", "clustering_coefficient", "closeness", "community",
)


@dataclass
class PropertyTable:
    degree: np.ndarray
    avg_neighbor_degree: np.ndarray
    triangles: np.ndarray
    clustering_coefficient: np.ndarray
    closeness: np.ndarray
    community: np.ndarray
    graph_stats: dict = field(default_factory=dict)

    def column(self, name):
        return getattr(self, name)

    def write(self, path, g: Graph | None = None):
        path = Path(path)
        n = len(self.degree)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("node_id",) + PROPERTY_COLUMNS)
            for u in range(n):
                nid = g.label_of(u) if g is not None else u
                w.writerow([nid] + [_fmt(self.column(c)[u]) for c in PROPERTY_COLUMNS])
        path.with_suffix(".json").write_text(json.dumps(self.graph_stats, indent=2))


def _fmt(x):
    return str(int(x)) if isinstance(x, (np.integer, int)) else repr(float(x))


def property_table(g: Graph, seed: int = 0) -> PropertyTable:
    deg = g.degrees()
    if g.num_edges:
        comm, q = louvain_communities(g, seed)
    else:
        comm, q = np.arange(g.num_nodes), float("nan")
    stats = {
        "num_nodes": g.num_nodes,
        "num_edges": g.num_edges,
        "transitivity": transitivity(g),
        "density": density(g),
        "avg_clustering": avg_clustering(g),
        "modularity": q,
        "num_communities": int(comm.max()) + 1 if len(comm) else 0,
    }
    return PropertyTable(
        degree=deg,
        avg_neighbor_degree=avg_neighbor_degree(g),
        triangles=triangle_counts(g),
        clustering_coefficient=clustering_coefficients(g),
        closeness=closeness_centrality(g),
        community=comm,
        graph_stats=stats,
    )


def powerlaw_fit(degrees, min_tail: int = 50):
    """Discrete power-law fit of a degree sequence.

    For every candidate ``k_min`` with at least ``min_tail`` tail samples the
    exponent is the approximate discrete MLE
    ``1 + n / sum(log(k / (k_min - 1/2)))``; the ``k_min`` whose fitted tail
    CDF has the smallest KS distance to the data wins.
    Returns ``(alpha, k_min, ks_distance)``.
    """
    d = np.sort(np.asarray(degrees)[np.asarray(degrees) > 0]).astype(np.float64)
    best = None
    for kmin in np.unique(d):
        tail = d[d >= kmin]
        if len(tail) < min_tail:
            break
        alpha = 1.0 + len(tail) / np.log(tail / (kmin - 0.5)).sum()
        ks = np.unique(tail)
        emp = np.searchsorted(tail, ks, side="right") / len(tail)
        model = 1.0 - ((ks + 0.5) / (kmin - 0.5)) ** (1.0 - alpha)
        dist = float(np.abs(emp - model).max())
        if best is None or dist < best[2]:
            best = (float(alpha), int(kmin), dist)
    if best is None:
        raise ValueError(f"fewer than {min_tail} positive degrees")
    return best


def degree_tail_slope(g: Graph, min_tail: int = 50) -> float:
    """Log-log slope of the degree density tail, i.e. minus the fitted exponent."""
    return -powerlaw_fit(g.degrees(), min_tail)[0]


def ccdf_slope(g: Graph, k_min: int = 1) -> float:
    """Least-squares log-log slope of the complementary degree CDF (for reference)."""
    d = g.degrees()
    d = np.sort(d[d >= k_min])
    ks = np.unique(d)
    ccdf = 1.0 - np.searchsorted(d, ks, side="left") / len(d)
    return float(np.polyfit(np.log(ks), np.log(ccdf), 1)[0])
