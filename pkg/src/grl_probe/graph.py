"""Immutable undirected simple graph in compressed sparse row layout."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    pass


class EdgeListParseError(GraphError):
    pass


class EmptyGraphError(GraphError):
    pass


@dataclass(frozen=True)
class LoadReport:
    lines: int
    self_loops: int
    duplicates: int


class Graph:
    """Undirected simple graph.

    Nodes are dense ids ``0..N-1``. ``indptr``/``indices`` hold the sorted
    neighbor lists; ``edges`` holds each undirected edge once as ``(u, v)``
    with ``u < v``, sorted lexicographically. ``labels`` maps internal ids
    back to the ids read from disk.
    """

    __slots__ = ("num_nodes", "indptr", "indices", "edges", "labels", "_fingerprint")

    def __init__(self, num_nodes, edges=(), labels=None):
        num_nodes = int(num_nodes)
        if num_nodes < 0:
            raise GraphError("num_nodes must be non-negative")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= num_nodes):
            raise GraphError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        e = np.sort(e, axis=1)
        if len(e):
            e = np.unique(e, axis=0)
        both = np.concatenate([e, e[:, ::-1]]) if len(e) else np.empty((0, 2), np.int64)
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        indptr = np.zeros(num_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(both[:, 0], minlength=num_nodes), out=indptr[1:])
        indices = np.ascontiguousarray(both[:, 1])
        for arr in (e, indptr, indices):
            arr.setflags(write=False)
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != num_nodes:
                raise GraphError("labels length must equal num_nodes")
        self.num_nodes = num_nodes
        self.edges = e
        self.indptr = indptr
        self.indices = indices
        self.labels = labels
        self._fingerprint = None

    def __repr__(self):
        return f"Graph(N={self.num_nodes}, |E|={self.num_edges})"

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, u: int) -> np.ndarray:
        self._check(u)
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        self._check(u)
        return int(self.indptr[u + 1] - self.indptr[u])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.num_nodes,) * 2)

    def label_of(self, u: int):
        return self.labels[u] if self.labels is not None else u

    def fingerprint(self) -> str:
        if self._fingerprint is None:
            h = hashlib.sha256()
            h.update(str(self.num_nodes).encode())
            h.update(np.ascontiguousarray(self.edges).tobytes())
            self._fingerprint = h.hexdigest()[:16]
        return self._fingerprint

    def _check(self, u):
        if not 0 <= u < self.num_nodes:
            raise IndexError(f"node {u} out of range for N={self.num_nodes}")

    def subgraph(self, nodes) -> "Graph":
        """Induced subgraph on ``nodes`` (ids remapped in ascending order)."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.num_nodes, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        e = remap[self.edges]
        e = e[(e >= 0).all(axis=1)]
        labels = None
        if self.labels is not None:
            labels = [self.labels[i] for i in nodes]
        return Graph(len(nodes), e, labels)

    def with_edges_removed(self, pairs) -> "Graph":
        pairs = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
        if not len(pairs):
            return self
        key = self.edges[:, 0] * self.num_nodes + self.edges[:, 1]
        drop = np.isin(key, pairs[:, 0] * self.num_nodes + pairs[:, 1])
        return Graph(self.num_nodes, self.edges[~drop], self.labels)


def connected_components(g: Graph):
    """Component id per node (contiguous, ordered by smallest member) and sizes."""
    if g.num_nodes == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    from scipy.sparse.csgraph import connected_components as _cc

    _, raw = _cc(g.adjacency(), directed=False)
    # relabel so ids follow order of first appearance
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    comp = relabel[raw].astype(np.int64)
    return comp, np.bincount(comp)


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component.

    Ties go to the component holding the smallest node id, which is the
    lowest component id since ids follow first appearance.
    """
    comp, sizes = connected_components(g)
    if len(sizes) <= 1:
        return g
    best = int(np.argmax(sizes))
    return g.subgraph(np.flatnonzero(comp == best))


def is_bipartite(g: Graph) -> bool:
    color = np.full(g.num_nodes, -1, dtype=np.int8)
    for s in range(g.num_nodes):
        if color[s] >= 0:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in g.neighbors(u):
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    return False
    return True


def _sort_key(label):
    # numeric ids sort numerically, everything else lexicographically after them
    try:
        return (0, int(label), "")
    except ValueError:
        return (1, 0, label)


def load_edge_list(path, delimiter: str | None = None, return_report: bool = False):
    """Read an undirected edge list.

    Lines starting with ``#`` and blank lines are skipped. The first two
    tokens of every other line are node ids; extra tokens are ignored.
    Self-loops and duplicate edges are dropped and counted.
    """
    path = Path(path)
    index: dict[str, int] = {}
    raw = []
    n_lines = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            n_lines += 1
            toks = s.split(delimiter) if delimiter else s.split()
            toks = [t.strip() for t in toks if t.strip()]
            if len(toks) < 2:
                raise EdgeListParseError(f"{path}:{lineno}: expected two node ids, got {s!r}")
            raw.append((toks[0], toks[1]))
            for t in toks[:2]:
                index.setdefault(t, len(index))
    if not raw:
        raise EmptyGraphError(f"{path}: no edges")
    labels = sorted(index, key=_sort_key)
    remap = {lab: i for i, lab in enumerate(labels)}
    e = np.array([(remap[a], remap[b]) for a, b in raw], dtype=np.int64)
    loops = int((e[:, 0] == e[:, 1]).sum())
    g = Graph(len(labels), e, labels)
    report = LoadReport(lines=n_lines, self_loops=loops, duplicates=len(e) - loops - g.num_edges)
    if loops or report.duplicates:
        logger.info("%s: dropped %d self-loops, %d duplicate edges", path, loops, report.duplicates)
    return (g, report) if return_report else g


def write_edge_list(g: Graph, path, use_labels: bool = True) -> None:
    """Canonical writer: ``min<TAB>max`` per line, lexicographic order."""
    if use_labels and g.labels is not None:
        pairs = []
        for u, v in g.edges:
            a, b = sorted((g.labels[u], g.labels[v]), key=_sort_key)
            pairs.append((_sort_key(a), _sort_key(b), a, b))
        pairs.sort()
        lines = [f"{a}\t{b}\n" for _, _, a, b in pairs]
    else:
        lines = [f"{u}\t{v}\n" for u, v in g.edges]
    Path(path).write_text("".join(lines), encoding="utf-8")


def canonical_edge_set(g: Graph) -> set:
    """Edge set in terms of external labels, for isomorphism-by-identity checks."""
    out = set()
    for u, v in g.edges:
        a, b = str(g.label_of(u)), str(g.label_of(v))
        out.add((a, b) if a <= b else (b, a))
    return out


@dataclass
class ComponentMap:
    component_id: np.ndarray
    component_sizes: np.ndarray = field(default=None)

    @classmethod
    def of(cls, g: Graph) -> "ComponentMap":
        comp, sizes = connected_components(g)
        return cls(comp, sizes)
