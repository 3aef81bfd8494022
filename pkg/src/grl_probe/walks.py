"""Random walks on graphs and exact analysis of the walk transition matrix.

The dense routines (transition matrix, its powers, spectra) certify the
degree-balance and stationary-limit identities of the uniform walk and are
capped at ``DENSE_CAP`` nodes. Walk sampling runs in numba kernels with
one counter-based random stream per (seed, source node, walk index), so a
corpus does not depend on how sources are scheduled.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numba as nb
import numpy as np
import scipy.linalg

from . import _rng
from .graph import Graph, connected_components, is_bipartite

DENSE_CAP = 2000


class DenseCapError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def _check_cap(g, cap):
    if g.num_nodes > cap:
        raise DenseCapError(f"graph has {g.num_nodes} nodes; dense cap is {cap}")


def transition_matrix(g: Graph, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``P = D^-1 A``; rows of isolated nodes are zero."""
    _check_cap(g, cap)
    a = g.adjacency().toarray()
    deg = a.sum(axis=1)
    p = np.zeros_like(a)
    nz = deg > 0
    p[nz] = a[nz] / deg[nz, None]
    return p


def matrix_power_transition(p: np.ndarray, t: int) -> np.ndarray:
    if t < 1:
        raise ValueError("t must be >= 1")
    out = p.copy()
    for _ in range(t - 1):
        out = out @ p
    return out


def verify_degree_balance(g: Graph, t_max: int, cap: int = DENSE_CAP) -> float:
    """Largest ``|D_ii P^t_ij - D_jj P^t_ji|`` over ``t <= t_max``."""
    p = transition_matrix(g, cap)
    d = g.degrees().astype(np.float64)
    worst = 0.0
    pt = p.copy()
    for t in range(1, t_max + 1):
        if t > 1:
            pt = pt @ p
        flow = d[:, None] * pt
        worst = max(worst, float(np.abs(flow - flow.T).max(initial=0.0)))
    return worst


def stationary_distribution(g: Graph) -> np.ndarray:
    d = g.degrees().astype(np.float64)
    if d.sum() == 0:
        raise PreconditionError("stationary distribution needs at least one edge")
    return d / d.sum()


def check_ergodic(g: Graph) -> None:
    _, sizes = connected_components(g)
    if len(sizes) != 1:
        raise PreconditionError("graph is disconnected: P^t has no unique limit")
    if g.num_edges == 0:
        raise PreconditionError("graph has no edges")
    if is_bipartite(g):
        raise PreconditionError("graph is bipartite (periodic walk): P^t does not converge")


def verify_convergence(g: Graph, t: int, cap: int = DENSE_CAP) -> float:
    """``max_i ||P^t[i] - pi||_1``; requires a connected non-bipartite graph."""
    check_ergodic(g)
    p = transition_matrix(g, cap)
    pi = stationary_distribution(g)
    # repeated squaring keeps t = 500 cheap; the rows stay stochastic
    result = None
    base = p
    k = t
    while k:
        if k & 1:
            result = base if result is None else result @ base
        k >>= 1
        if k:
            base = base @ base
    return float(np.abs(result - pi[None, :]).sum(axis=1).max())


@dataclass
class SpectralSummary:
    eigenvalues: np.ndarray
    stationary: np.ndarray


def normalized_transition(g: Graph, cap: int = DENSE_CAP) -> np.ndarray:
    """``S = D^1/2 P D^-1/2 = D^-1/2 A D^-1/2`` (symmetric)."""
    _check_cap(g, cap)
    a = g.adjacency().toarray()
    s = 1.0 / np.sqrt(a.sum(axis=1))
    return s[:, None] * a * s[None, :]


def spectral_summary(g: Graph, cap: int = DENSE_CAP) -> SpectralSummary:
    _, sizes = connected_components(g)
    if g.num_edges == 0 or len(sizes) != 1:
        raise PreconditionError("spectral summary requires a connected graph with an edge")
    s = normalized_transition(g, cap)
    vals = scipy.linalg.eigh(s, eigvals_only=True)
    return SpectralSummary(np.sort(vals)[::-1], stationary_distribution(g))


# --------------------------------------------------------------------------
# walk sampling


@dataclass(frozen=True)
class WalkParams:
    num_walks: int = 10
    walk_length: int = 80
    p_return: float = 1.0
    q_inout: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_walks < 1 or self.walk_length < 1:
            raise ValueError("num_walks and walk_length must be >= 1")
        if not (self.p_return > 0 and self.q_inout > 0):
            raise ValueError("p_return and q_inout must be positive")

    @property
    def is_uniform(self) -> bool:
        return self.p_return == 1.0 and self.q_inout == 1.0


@dataclass
class WalkCorpus:
    """Walks as a ragged array: ``walks[offsets[i]:offsets[i+1]]`` is walk i."""

    walks: np.ndarray
    offsets: np.ndarray
    sources: np.ndarray
    params: WalkParams
    graph_fingerprint: str = ""

    def __len__(self):
        return len(self.offsets) - 1

    def __getitem__(self, i):
        return self.walks[self.offsets[i]:self.offsets[i + 1]]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def num_tokens(self) -> int:
        return int(self.offsets[-1])

    def to_lists(self):
        return [w.tolist() for w in self]

    def write(self, path):
        with Path(path).open("w") as fh:
            for w in self:
                fh.write(" ".join(map(str, w.tolist())) + "\n")

    @classmethod
    def read(cls, path, params: WalkParams | None = None):
        walks = [np.array(line.split(), dtype=np.int64) for line in Path(path).read_text().splitlines() if line.strip()]
        return cls.from_lists(walks, params or WalkParams())

    @classmethod
    def from_lists(cls, walks, params: WalkParams, fingerprint: str = ""):
        walks = [np.asarray(w, dtype=np.int64) for w in walks]
        lengths = np.array([len(w) for w in walks], dtype=np.int64)
        offsets = np.zeros(len(walks) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        flat = np.concatenate(walks) if walks else np.zeros(0, np.int64)
        sources = np.array([w[0] if len(w) else -1 for w in walks], dtype=np.int64)
        return cls(flat, offsets, sources, params, fingerprint)

    def metadata(self):
        return {"params": asdict(self.params), "graph": self.graph_fingerprint,
                "num_walks": len(self), "num_tokens": self.num_tokens}


@nb.njit(cache=True, inline="always")
def _is_neighbor(indptr, indices, a, b):
    lo = indptr[a]
    hi = indptr[a + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        x = indices[mid]
        if x == b:
            return True
        if x < b:
            lo = mid + 1
        else:
            hi = mid
    return False


@nb.njit(cache=True)
def _walk_one(indptr, indices, src, length, inv_p, inv_q, uniform, state, out, pos, weights):
    out[pos] = src
    n = 1
    cur = src
    prev = -1
    while n <= length:
        lo = indptr[cur]
        deg = indptr[cur + 1] - lo
        if deg == 0:
            break
        if uniform or prev < 0:
            nxt = indices[lo + _rng.next_below(state, deg)]
        else:
            total = 0.0
            for k in range(deg):
                j = indices[lo + k]
                if j == prev:
                    w = inv_p
                elif _is_neighbor(indptr, indices, prev, j):
                    w = 1.0
                else:
                    w = inv_q
                total += w
                weights[k] = total
            r = _rng.next_float(state) * total
            k = 0
            while k < deg - 1 and weights[k] <= r:
                k += 1
            nxt = indices[lo + k]
        out[pos + n] = nxt
        n += 1
        prev = cur
        cur = nxt
    return n


@nb.njit(cache=True)
def _walk_kernel(indptr, indices, sources, walk_ids, length, inv_p, inv_q, uniform, seed, maxdeg):
    n_walks = len(sources)
    buf = np.empty(n_walks * (length + 1), dtype=np.int64)
    lens = np.empty(n_walks, dtype=np.int64)
    weights = np.empty(max(maxdeg, 1), dtype=np.float64)
    state = np.empty(1, dtype=np.uint64)
    for i in range(n_walks):
        state[0] = _rng.stream_key(seed, sources[i], walk_ids[i])
        lens[i] = _walk_one(indptr, indices, sources[i], length, inv_p, inv_q, uniform,
                            state, buf, i * (length + 1), weights)
    return buf, lens


def _run_walks(g: Graph, params: WalkParams, uniform: bool) -> WalkCorpus:
    n = g.num_nodes
    # rounds of one walk per node, each round visiting nodes in a shuffled order
    rng = np.random.default_rng(params.seed)
    sources = np.concatenate([rng.permutation(n) for _ in range(params.num_walks)]).astype(np.int64)
    walk_ids = np.repeat(np.arange(params.num_walks, dtype=np.int64), n)
    maxdeg = int(g.degrees().max(initial=0))
    buf, lens = _walk_kernel(g.indptr, g.indices, sources, walk_ids, params.walk_length,
                             1.0 / params.p_return, 1.0 / params.q_inout, uniform,
                             _rng.seed_to_int(params.seed), maxdeg)
    stride = params.walk_length + 1
    keep = (np.arange(stride)[None, :] < lens[:, None]).ravel()
    flat = buf[keep]
    offsets = np.zeros(len(lens) + 1, dtype=np.int64)
    np.cumsum(lens, out=offsets[1:])
    return WalkCorpus(flat, offsets, sources, params, g.fingerprint())


def uniform_walks(g: Graph, params: WalkParams) -> WalkCorpus:
    """First-order walks: ``num_walks`` per node of ``walk_length`` steps.

    A walk has ``walk_length + 1`` nodes; one started at an isolated node
    is just that node.
    """
    return _run_walks(g, params, uniform=True)


def biased_walks(g: Graph, params: WalkParams) -> WalkCorpus:
    """Second-order (return/in-out biased) walks.

    The first step is uniform. Afterwards, standing at ``i`` having come
    from ``k``, neighbor ``j`` gets weight ``1/p`` if ``j == k``, ``1`` if
    ``j`` is adjacent to ``k`` and ``1/q`` otherwise. With ``p == q == 1``
    the output is identical to :func:`uniform_walks` for the same seed.
    """
    return _run_walks(g, params, uniform=params.is_uniform)


def second_order_weights(g: Graph, prev: int, cur: int, p: float, q: float) -> dict:
    """Normalized next-step distribution from ``cur`` having arrived from ``prev``."""
    w = {}
    for j in g.neighbors(cur):
        j = int(j)
        if j == prev:
            w[j] = 1.0 / p
        elif g.has_edge(prev, j):
            w[j] = 1.0
        else:
            w[j] = 1.0 / q
    total = sum(w.values())
    return {j: x / total for j, x in w.items()}
