"""Seeded random-graph generators: Barabasi-Albert, Erdos-Renyi, Holme-Kim.

All generators draw from ``numpy.random.Generator`` (PCG64) seeded with
the given integer, so a spec reproduces its edge set bit for bit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .graph import Graph

FAMILIES = ("BA", "ER", "HK")

# Parameter grids used for the synthetic datasets (N = 5000 throughout).
STUDY_GRID = {
    "BA": [{"m": m} for m in (2, 5, 9)],
    "ER": [{"p": p} for p in (0.002, 0.004, 0.008, 0.016)],
    "HK": [{"m": m, "p": p} for m in (3, 4, 5) for p in (0.005, 0.02, 0.09)],
}
STUDY_N = 5000


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int
    m: int | None = None
    p: float | None = None
    seed: int = 0

    def __post_init__(self):
        fam = self.family.upper()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}")
        if fam in ("BA", "HK") and (self.m is None or not 1 <= self.m < self.n):
            raise ValueError(f"{fam} requires 1 <= m < n, got m={self.m}, n={self.n}")
        if fam in ("ER", "HK") and (self.p is None or not 0.0 <= self.p <= 1.0):
            raise ValueError(f"{fam} requires 0 <= p <= 1, got p={self.p}")

    def generate(self) -> Graph:
        if self.family == "BA":
            return generate_ba(self.n, self.m, self.seed)
        if self.family == "ER":
            return generate_er(self.n, self.p, self.seed)
        return generate_hk(self.n, self.m, self.p, self.seed)

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @property
    def name(self) -> str:
        parts = [self.family.lower(), f"n{self.n}"]
        if self.m is not None:
            parts.append(f"m{self.m}")
        if self.p is not None:
            parts.append(f"p{self.p:g}")
        parts.append(f"s{self.seed}")
        return "_".join(parts)


class _Attachment:
    """Preferential-attachment pool over a flattened endpoint list.

    Seed nodes enter with one placeholder token so they can be picked
    before they have any edge; the placeholder becomes their first degree
    unit when they are first attached to.
    """

    def __init__(self, n, m):
        self.pool = np.empty(2 * m * n + m, dtype=np.int64)
        self.pool[:m] = np.arange(m)
        self.size = m
        self.deg = np.zeros(n, dtype=np.int64)

    def draw(self, rng):
        return int(self.pool[rng.integers(self.size)])


def _grow(n, m, p, seed):
    rng = np.random.default_rng(seed)
    pool = _Attachment(n, m)
    adj = [set() for _ in range(n)]
    edges = []
    for src in range(m, n):
        # source tokens are only appended after the round so a node never
        # draws itself
        targets = []
        last = -1
        while len(targets) < m:
            t = -1
            if targets and p > 0.0 and rng.random() < p:
                cand = [x for x in sorted(adj[last]) if x != src and x not in targets]
                if cand:
                    t = cand[int(rng.integers(len(cand)))]
            if t < 0:
                t = pool.draw(rng)
                while t in targets:
                    t = pool.draw(rng)
            targets.append(t)
            last = t
        for t in targets:
            edges.append((src, t))
            adj[src].add(t)
            adj[t].add(src)
            if pool.deg[t] > 0:
                pool.pool[pool.size] = t
                pool.size += 1
            pool.deg[t] += 1
        pool.pool[pool.size:pool.size + m] = src
        pool.size += m
        pool.deg[src] += m
    return Graph(n, edges)


def generate_ba(n: int, m: int, seed: int = 0) -> Graph:
    """Barabasi-Albert preferential attachment; exactly ``m*(n-m)`` edges."""
    GeneratorSpec("BA", n, m=m, seed=seed)
    return _grow(n, m, 0.0, seed)


def generate_hk(n: int, m: int, p: float, seed: int = 0) -> Graph:
    """Holme-Kim powerlaw-cluster growth.

    After the first preferential step of each arrival, every further step
    is a triad-formation step with probability ``p``: link to a random
    neighbor of the node attached in the previous step. With ``p == 0`` no
    coin is drawn and the output equals :func:`generate_ba` for the same
    seed.
    """
    GeneratorSpec("HK", n, m=m, p=p, seed=seed)
    return _grow(n, m, float(p), seed)


def generate_er(n: int, p: float, seed: int = 0) -> Graph:
    """G(n, p): every unordered pair independently with probability ``p``.

    Sampled as Binomial(n(n-1)/2, p) edges followed by a uniform choice of
    that many distinct pairs, which has the same law.
    """
    GeneratorSpec("ER", n, p=p, seed=seed)
    rng = np.random.default_rng(seed)
    total = n * (n - 1) // 2
    k = int(rng.binomial(total, p)) if total else 0
    if k == 0:
        return Graph(n)
    if k == total:
        flat = np.arange(total, dtype=np.int64)
    else:
        flat = rng.choice(total, size=k, replace=False)
    return Graph(n, _unrank_pairs(np.sort(flat), n))


def _unrank_pairs(idx, n):
    # pair index k -> (i, j), i < j, rows enumerated i = 0, 1, ...
    idx = np.asarray(idx, dtype=np.int64)
    start = lambda i: i * (2 * n - i - 1) // 2  # noqa: E731
    i = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * idx)) / 2).astype(np.int64)
    i = np.clip(i, 0, n - 2)
    # repair floating rounding at row boundaries
    i = np.where(start(i) > idx, i - 1, i)
    i = np.where(start(i + 1) <= idx, i + 1, i)
    j = idx - start(i) + i + 1
    return np.stack([i, j], axis=1)


def generate_sbm(sizes, p_in: float, p_out: float, seed: int = 0):
    """Planted-partition block model; returns (graph, block labels)."""
    rng = np.random.default_rng(seed)
    sizes = list(sizes)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = len(labels)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(len(iu)) < prob
    return Graph(n, np.stack([iu[keep], ju[keep]], axis=1)), labels


def two_cliques(k: int) -> Graph:
    """Two disjoint complete graphs on ``k`` nodes each."""
    iu, ju = np.triu_indices(k, k=1)
    e = np.concatenate([np.stack([iu, ju], 1), np.stack([iu + k, ju + k], 1)])
    return Graph(2 * k, e)


def complete_graph(n: int) -> Graph:
    iu, ju = np.triu_indices(n, k=1)
    return Graph(n, np.stack([iu, ju], 1))


def star_graph(n: int) -> Graph:
    """Star on ``n`` nodes, node 0 at the center."""
    return Graph(n, [(0, i) for i in range(1, n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])
