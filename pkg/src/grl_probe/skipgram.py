"""Skip-gram with negative sampling over random-walk corpora.

DeepWalk is uniform walks + :func:`train_skipgram`; Node2Vec swaps in
biased walks. Training is plain per-pair SGD with a learning rate that
decays linearly to zero over all epochs.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numba as nb
import numpy as np

from . import _rng
from .embedding import DivergenceError, EmbeddingMatrix
from .graph import Graph
from .walks import WalkCorpus, WalkParams, biased_walks, uniform_walks

# Hyperparameter grids of the shallow methods.
DIM_GRID = (32, 64, 128, 256)
NS_GRID = (-0.75, 0.0, 0.75)
SFREQ_GRID = (1e-4, 1e-3, 1e-2)
P_GRID = (1.0, 2.0)
Q_GRID = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class SkipGramConfig:
    dim: int = 128
    window: int = 10
    negatives: int = 5
    ns_exponent: float = 0.75
    subsample_freq: float = 0.0  # 0 disables subsampling
    epochs: int = 1
    learning_rate: float = 0.025
    seed: int = 0
    workers: int = 1
    loss_chunk: int = 1000

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1:
            raise ValueError("dim, window and negatives must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def negative_sampling_table(g: Graph, ns_exponent: float) -> np.ndarray:
    """Noise distribution ``P(j) ~ max(deg j, 1) ** ns_exponent``."""
    deg = g.degrees()
    if deg.sum() == 0:
        raise ValueError("negative sampling needs at least one edge")
    w = np.maximum(deg, 1).astype(np.float64) ** ns_exponent
    return w / w.sum()


def subsample_corpus(corpus: WalkCorpus, subsample_freq: float, seed: int = 0) -> WalkCorpus:
    """Drop frequent tokens; keep node ``u`` with prob ``min(1, sqrt(t / f(u)))``.

    ``f(u)`` is the share of corpus tokens equal to ``u``. A walk is cut
    wherever a token was dropped so no context pair spans the gap.
    """
    if subsample_freq <= 0:
        raise ValueError("subsample_freq must be positive")
    tokens = corpus.walks
    if len(tokens) == 0:
        return corpus
    freq = np.bincount(tokens) / len(tokens)
    keep_p = np.minimum(1.0, np.sqrt(subsample_freq / np.maximum(freq, 1e-300)))
    rng = np.random.default_rng(seed)
    keep = rng.random(len(tokens)) < keep_p[tokens]
    # new fragment starts at every kept token that follows a drop or a walk start
    walk_start = np.zeros(len(tokens), dtype=bool)
    walk_start[corpus.offsets[:-1][np.diff(corpus.offsets) > 0]] = True
    prev_kept = np.concatenate([[False], keep[:-1]])
    starts = keep & (walk_start | ~prev_kept)
    kept_idx = np.flatnonzero(keep)
    frag_of = np.cumsum(starts)[kept_idx] - 1
    lengths = np.bincount(frag_of, minlength=int(starts.sum()))
    offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    flat = tokens[kept_idx]
    return WalkCorpus(flat, offsets, flat[offsets[:-1]], corpus.params, corpus.graph_fingerprint)


def pair_loss(z, c_pos, c_neg):
    """Negative log-likelihood of one (center, context) pair plus its negatives."""
    s_pos = z @ c_pos
    s_neg = c_neg @ z
    return float(np.logaddexp(0.0, -s_pos) + np.logaddexp(0.0, s_neg).sum())


def pair_grad(z, c_pos, c_neg):
    """Analytic gradient of :func:`pair_loss` w.r.t. ``(z, c_pos, c_neg)``."""
    g_pos = _sigmoid(z @ c_pos) - 1.0
    g_neg = _sigmoid(c_neg @ z)
    dz = g_pos * c_pos + g_neg @ c_neg
    return dz, g_pos * z, g_neg[:, None] * z[None, :]


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@nb.njit(cache=True, inline="always")
def _logsig(x):
    # log(sigmoid(x)) without overflow
    if x >= 0:
        return -np.log1p(np.exp(-x))
    return x - np.log1p(np.exp(x))


@nb.njit(cache=True, inline="always")
def _sig(x):
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


@nb.njit(cache=True, fastmath=True, error_model="numpy")
def _train_walk(walk, W, C, alias_p, alias_i, window, negatives, lr0, done, total, state, neu, stats):
    # stats: [loss_sum, pair_count] accumulated for the loss trace
    L = len(walk)
    d = W.shape[1]
    for i in range(L):
        u = walk[i]
        lo = max(0, i - window)
        hi = min(L, i + window + 1)
        for j in range(lo, hi):
            if j == i:
                continue
            lr = lr0 * max(1e-4, 1.0 - done[0] / total)
            # the loss trace is estimated from every 8th pair
            track = (np.int64(done[0]) & 7) == 0
            done[0] += 1.0
            for x in range(d):
                neu[x] = 0.0
            pair_loss = 0.0
            for s in range(negatives + 1):
                if s == 0:
                    v = walk[j]
                    label = 1.0
                else:
                    v = _rng.next_below(state, len(alias_p))
                    if _rng.next_float(state) >= alias_p[v]:
                        v = alias_i[v]
                    if v == walk[j]:
                        continue
                    label = 0.0
                dot = 0.0
                for x in range(d):
                    dot += W[u, x] * C[v, x]
                sg = _sig(dot)
                # log-loss from the sigmoid already computed; clipped away from 0
                if track:
                    if label > 0:
                        pair_loss -= np.log(max(sg, 1e-300))
                    else:
                        pair_loss -= np.log(max(1.0 - sg, 1e-300))
                g = (label - sg) * lr
                for x in range(d):
                    neu[x] += g * C[v, x]
                    C[v, x] += g * W[u, x]
            for x in range(d):
                W[u, x] += neu[x]
            if track:
                stats[0] += pair_loss
                stats[1] += 1.0


@nb.njit(cache=True)
def _train_serial(flat, offsets, order, W, C, alias_p, alias_i, window, negatives, lr0, epochs, seed, chunk):
    n_walks = len(offsets) - 1
    total = 0.0
    for i in range(n_walks):
        L = offsets[i + 1] - offsets[i]
        for k in range(L):
            total += min(L, k + window + 1) - max(0, k - window) - 1
    total *= epochs
    done = np.zeros(1)
    neu = np.empty(W.shape[1])
    state = np.empty(1, dtype=np.uint64)
    trace = np.empty(int(total // chunk) + 2 * epochs + 2)
    nt = 0
    stats = np.zeros(2)
    for ep in range(epochs):
        for r in range(n_walks):
            i = order[ep, r]
            state[0] = _rng.stream_key(seed, ep, i)
            _train_walk(flat[offsets[i]:offsets[i + 1]], W, C, alias_p, alias_i, window, negatives,
                        lr0, done, total, state, neu, stats)
            if not np.isfinite(stats[0]):
                return trace[:nt], False
            if stats[1] >= chunk:
                trace[nt] = stats[0] / stats[1]
                nt += 1
                stats[:] = 0.0
        if stats[1] > 0:
            trace[nt] = stats[0] / stats[1]
            nt += 1
            stats[:] = 0.0
    return trace[:nt], True


@nb.njit(cache=True, parallel=True)
def _train_hogwild(flat, offsets, order, W, C, alias_p, alias_i, window, negatives, lr0, epochs, seed, shards):
    # lock-free shared updates; reproducible only in distribution
    n_walks = len(offsets) - 1
    total = 0.0
    for i in range(n_walks):
        L = offsets[i + 1] - offsets[i]
        total += L * 2 * window
    total *= epochs
    ok = np.ones(shards, dtype=np.bool_)
    for ep in range(epochs):
        for s in nb.prange(shards):
            done = np.zeros(1)
            done[0] = ep * total / epochs
            neu = np.empty(W.shape[1])
            state = np.empty(1, dtype=np.uint64)
            stats = np.zeros(2)
            for r in range(s, n_walks, shards):
                i = order[ep, r]
                state[0] = _rng.stream_key(seed, ep, i)
                _train_walk(flat[offsets[i]:offsets[i + 1]], W, C, alias_p, alias_i, window, negatives,
                            lr0, done, total / shards, state, neu, stats)
            if not np.isfinite(stats[0]):
                ok[s] = False
    return ok.all()


def alias_table(noise):
    """Walker/Vose alias table for O(1) draws from ``noise``."""
    p = np.asarray(noise, dtype=np.float64)
    n = len(p)
    scaled = p / p.sum() * n
    prob = np.ones(n)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s, l = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        (small if scaled[l] < 1.0 else large).append(l)
    return prob, alias


def init_vectors(n, dim, seed):
    rng = np.random.default_rng(seed)
    W = (rng.random((n, dim)) - 0.5) / dim
    C = np.zeros((n, dim))
    return W, C


def train_skipgram(corpus: WalkCorpus, config: SkipGramConfig, num_nodes: int | None = None,
                   noise: np.ndarray | None = None) -> EmbeddingMatrix:
    """Fit input/context vectors on every (center, context) pair in window.

    ``noise`` is the negative-sampling distribution; by default it is the
    corpus unigram distribution raised to ``ns_exponent``. Returns the
    input vectors; the per-chunk mean pair loss is kept in ``loss_trace``.
    """
    if config.subsample_freq and config.subsample_freq > 0:
        corpus = subsample_corpus(corpus, config.subsample_freq, config.seed)
    if corpus.num_tokens == 0 or len(corpus) == 0:
        raise ValueError("empty corpus")
    n = int(num_nodes if num_nodes is not None else corpus.walks.max() + 1)
    if noise is None:
        counts = np.bincount(corpus.walks, minlength=n).astype(np.float64)
        noise = np.maximum(counts, 1.0) ** config.ns_exponent
        noise /= noise.sum()
    alias_p, alias_i = alias_table(noise)
    W, C = init_vectors(n, config.dim, config.seed)
    rng = np.random.default_rng(config.seed)
    order = np.stack([rng.permutation(len(corpus)) for _ in range(config.epochs)]).astype(np.int64)
    seed = _rng.seed_to_int(config.seed)
    if config.workers > 1:
        nb.set_num_threads(min(config.workers, nb.config.NUMBA_NUM_THREADS))
        ok = _train_hogwild(corpus.walks, corpus.offsets, order, W, C, alias_p, alias_i, config.window,
                            config.negatives, config.learning_rate, config.epochs, seed,
                            config.workers)
        trace = np.zeros(0)
        if not ok:
            raise DivergenceError("skip-gram loss became non-finite")
    else:
        trace, ok = _train_serial(corpus.walks, corpus.offsets, order, W, C, alias_p, alias_i, config.window,
                                  config.negatives, config.learning_rate, config.epochs, seed,
                                  config.loss_chunk)
        if not ok:
            last = trace[-1] if len(trace) else None
            raise DivergenceError(f"skip-gram loss became non-finite (last finite {last})", last)
    meta = {
        "method": "skipgram",
        "config": asdict(config),
        "graph": corpus.graph_fingerprint,
        "walks": asdict(corpus.params),
        "concurrency": "hogwild" if config.workers > 1 else "serial",
        "rng": _rng.RNG_ALGORITHM,
    }
    return EmbeddingMatrix(W, meta, context=C, loss_trace=np.asarray(trace))


def deepwalk(g: Graph, walk: WalkParams, config: SkipGramConfig) -> EmbeddingMatrix:
    corpus = uniform_walks(g, walk)
    emb = train_skipgram(corpus, config, g.num_nodes, negative_sampling_table(g, config.ns_exponent))
    emb.metadata["method"] = "deepwalk"
    return emb


def node2vec(g: Graph, walk: WalkParams, config: SkipGramConfig) -> EmbeddingMatrix:
    corpus = biased_walks(g, walk)
    emb = train_skipgram(corpus, config, g.num_nodes, negative_sampling_table(g, config.ns_exponent))
    emb.metadata["method"] = "node2vec"
    return emb
