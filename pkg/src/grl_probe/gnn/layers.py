"""Message-passing building blocks with explicit forward/backward passes.

Each ``*_forward`` returns ``(output, cache)``; the matching ``*_backward``
takes the upstream gradient and the cache and returns parameter (and
input) gradients. ``H=None`` stands for identity (one-hot) input, in which
case the first weight matrix acts as a per-node lookup table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

LEAKY_SLOPE = 0.2


def relu(x):
    return np.maximum(x, 0.0)


def _act(x, activation):
    if activation == "relu":
        return relu(x)
    if activation in (None, "linear"):
        return x
    raise ValueError(f"unknown activation {activation!r}")


def _act_grad(dy, pre, activation):
    if activation == "relu":
        return dy * (pre > 0)
    return dy


# --------------------------------------------------------------------------
# multiset aggregators


def aggregate_mean(X, dim=None):
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        return np.zeros(dim if dim is not None else (X.shape[1] if X.ndim == 2 else 0))
    return X.mean(axis=0)


def aggregate_max(X, dim=None):
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        return np.zeros(dim if dim is not None else (X.shape[1] if X.ndim == 2 else 0))
    return X.max(axis=0)


def aggregate_sum(X, dim=None):
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        return np.zeros(dim if dim is not None else (X.shape[1] if X.ndim == 2 else 0))
    return X.sum(axis=0)


def aggregate_maxpool(X, pool_weights=None, pool_bias=None):
    """Element-wise max of ``relu(X @ pool_weights + pool_bias)``.

    ``pool_weights=None`` means the identity transform.
    """
    X = np.asarray(X, dtype=np.float64)
    if pool_weights is None:
        out_dim = X.shape[1] if X.ndim == 2 else 0
    else:
        out_dim = pool_weights.shape[1]
    if X.size == 0:
        return np.zeros(out_dim)
    T = X if pool_weights is None else X @ pool_weights
    if pool_bias is not None:
        T = T + pool_bias
    return relu(T).max(axis=0)


# --------------------------------------------------------------------------
# neighborhoods


@dataclass(frozen=True)
class Neighborhoods:
    """Per-node neighbor lists in CSR form, possibly truncated (asymmetric)."""

    indptr: np.ndarray
    indices: np.ndarray

    @property
    def num_nodes(self):
        return len(self.indptr) - 1

    def degrees(self):
        return np.diff(self.indptr)

    def of(self, u):
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def padded(self):
        """``(N, max_deg)`` matrix of neighbor ids, ``-1`` padded."""
        deg = self.degrees()
        width = max(int(deg.max(initial=0)), 1)
        out = np.full((self.num_nodes, width), -1, dtype=np.int64)
        rows = np.repeat(np.arange(self.num_nodes), deg)
        cols = np.arange(len(self.indices)) - np.repeat(self.indptr[:-1], deg)
        out[rows, cols] = self.indices
        return out


def identity_features(g, max_degree=None, seed=0, symmetric=False) -> Neighborhoods:
    """Neighbor lists for identity-feature encoders.

    Node features are one-hot identities, which the encoders realize as
    trainable lookup rows. Nodes with more than ``max_degree`` neighbors
    keep a seeded uniform sample of ``max_degree`` of them. Truncation is
    per row, so ``v in N(u)`` no longer implies ``u in N(v)``; with
    ``symmetric=True`` the retained lists are symmetrized afterwards
    (which can push degrees back above the cap).
    """
    if max_degree is None:
        return Neighborhoods(g.indptr, g.indices)
    rng = np.random.default_rng(seed)
    deg = g.degrees()
    rows = []
    for u in range(g.num_nodes):
        nb = g.indices[g.indptr[u]:g.indptr[u + 1]]
        if deg[u] > max_degree:
            nb = np.sort(rng.choice(nb, size=max_degree, replace=False))
        rows.append(nb)
    if symmetric:
        src = np.concatenate([np.full(len(r), u) for u, r in enumerate(rows)]).astype(np.int64)
        dst = np.concatenate(rows).astype(np.int64)
        m = sp.coo_matrix((np.ones(len(src)), (src, dst)), shape=(g.num_nodes,) * 2).tocsr()
        m = ((m + m.T) > 0).tocsr()
        m.sort_indices()
        return Neighborhoods(m.indptr.astype(np.int64), m.indices.astype(np.int64))
    indptr = np.zeros(g.num_nodes + 1, dtype=np.int64)
    np.cumsum([len(r) for r in rows], out=indptr[1:])
    indices = np.concatenate(rows).astype(np.int64) if rows else np.zeros(0, np.int64)
    return Neighborhoods(indptr, indices)


# --------------------------------------------------------------------------
# GCN


def gcn_norm(nbhd: Neighborhoods) -> sp.csr_matrix:
    """``D~^-1/2 (A + I) D~^-1/2`` with ``D~`` the row sums of ``A + I``."""
    n = nbhd.num_nodes
    a = sp.csr_matrix((np.ones(len(nbhd.indices)), nbhd.indices, nbhd.indptr), shape=(n, n))
    a = a + sp.identity(n, format="csr")
    d = np.asarray(a.sum(axis=1)).ravel()
    s = sp.diags(1.0 / np.sqrt(d))
    return (s @ a @ s).tocsr()


def gcn_layer_forward(H, A_hat, W, b=None, activation="relu"):
    """``act(A_hat H W + b)``; ``H=None`` means identity input."""
    if H is None:
        if W.shape[0] != A_hat.shape[1]:
            raise ValueError("identity input needs W with one row per node")
        AH = None
        pre = A_hat @ W
    else:
        if H.shape[0] != A_hat.shape[1] or H.shape[1] != W.shape[0]:
            raise ValueError(f"shape mismatch: H {H.shape}, A {A_hat.shape}, W {W.shape}")
        AH = A_hat @ H
        pre = AH @ W
    if b is not None:
        pre = pre + b
    return _act(pre, activation), (H, AH, A_hat, W, pre, activation)


def gcn_layer_backward(dout, cache):
    H, AH, A_hat, W, pre, activation = cache
    dpre = _act_grad(dout, pre, activation)
    db = dpre.sum(axis=0)
    if H is None:
        return None, A_hat.T @ dpre, db
    dW = AH.T @ dpre
    dH = A_hat.T @ (dpre @ W.T)
    return dH, dW, db


# --------------------------------------------------------------------------
# GAT


@dataclass(frozen=True)
class AttentionStructure:
    """Edges ``u <- v`` for ``v in N(u) + {u}``, grouped by ``u``."""

    src: np.ndarray
    dst: np.ndarray
    indptr: np.ndarray

    @property
    def num_nodes(self):
        return len(self.indptr) - 1


def attention_structure(nbhd: Neighborhoods) -> AttentionStructure:
    n = nbhd.num_nodes
    deg = nbhd.degrees() + 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    src = np.repeat(np.arange(n, dtype=np.int64), deg)
    dst = np.empty(indptr[-1], dtype=np.int64)
    for u in range(n):
        row = np.append(nbhd.of(u), u)
        row.sort()
        dst[indptr[u]:indptr[u + 1]] = row
    return AttentionStructure(src, dst, indptr)


def _leaky(x):
    return np.where(x > 0, x, LEAKY_SLOPE * x)


def gat_layer_forward(H, st: AttentionStructure, W, a_src, a_dst, b=None, activation="relu"):
    """Multi-head attention layer with concatenated heads.

    ``W`` maps inputs to ``heads * F`` features (one row per node when
    ``H`` is None); ``a_src``/``a_dst`` are ``(heads, F)``. Per head the
    logit of edge ``u <- v`` is ``leaky(a_src . g_u + a_dst . g_v)``,
    softmax-normalized over ``v in N(u) + {u}``.
    """
    heads, F = a_src.shape
    if W.shape[1] != heads * F:
        raise ValueError(f"output width {W.shape[1]} not divisible into {heads} heads of {F}")
    n = st.num_nodes
    G = (W if H is None else H @ W).reshape(n, heads, F)
    s_src = np.einsum("nkf,kf->nk", G, a_src)
    s_dst = np.einsum("nkf,kf->nk", G, a_dst)
    logits_pre = s_src[st.src] + s_dst[st.dst]
    e = _leaky(logits_pre)
    starts = st.indptr[:-1]
    emax = np.maximum.reduceat(e, starts, axis=0)
    ex = np.exp(e - emax[st.src])
    den = np.add.reduceat(ex, starts, axis=0)
    alpha = ex / den[st.src]
    mats = [sp.csr_matrix((alpha[:, k], st.dst, st.indptr), shape=(n, n)) for k in range(heads)]
    out = np.stack([mats[k] @ G[:, k, :] for k in range(heads)], axis=1)
    pre = out.reshape(n, heads * F)
    if b is not None:
        pre = pre + b
    cache = (H, W, a_src, a_dst, G, logits_pre, alpha, mats, pre, activation, st)
    return _act(pre, activation), cache


def gat_attention(cache):
    """Attention weights ``(num_edges, heads)`` aligned with the structure's edges."""
    return cache[6]


def gat_layer_backward(dout, cache):
    H, W, a_src, a_dst, G, logits_pre, alpha, mats, pre, activation, st = cache
    n, heads, F = G.shape
    dpre = _act_grad(dout, pre, activation)
    db = dpre.sum(axis=0)
    dO = dpre.reshape(n, heads, F)
    dG = np.stack([mats[k].T @ dO[:, k, :] for k in range(heads)], axis=1)
    dalpha = np.einsum("ekf,ekf->ek", dO[st.src], G[st.dst])
    starts = st.indptr[:-1]
    inner = np.add.reduceat(alpha * dalpha, starts, axis=0)
    de = alpha * (dalpha - inner[st.src])
    dlog = de * np.where(logits_pre > 0, 1.0, LEAKY_SLOPE)
    ds_src = np.add.reduceat(dlog, starts, axis=0)
    ds_dst = np.stack([np.bincount(st.dst, weights=dlog[:, k], minlength=n) for k in range(heads)], axis=1)
    da_src = np.einsum("nk,nkf->kf", ds_src, G)
    da_dst = np.einsum("nk,nkf->kf", ds_dst, G)
    dG = dG + ds_src[:, :, None] * a_src[None] + ds_dst[:, :, None] * a_dst[None]
    dG = dG.reshape(n, heads * F)
    if H is None:
        return None, dG, da_src, da_dst, db
    return dG @ W.T, H.T @ dG, da_src, da_dst, db


# --------------------------------------------------------------------------
# GraphSAGE neighbor sampling


@dataclass(frozen=True)
class Sample:
    """Fixed-width neighbor sample: ``idx[i, j]`` is valid where ``mask`` is 1."""

    idx: np.ndarray
    mask: np.ndarray


def sample_neighbors(padded, deg, nodes, size, rng=None, deterministic=False) -> Sample:
    """Draw ``size`` neighbors per node.

    Random mode samples without replacement when a node has at least
    ``size`` neighbors and with replacement otherwise. Deterministic mode
    takes the first ``min(deg, size)`` neighbors and masks the remaining
    slots, so with ``size >= deg`` it reproduces the full neighborhood.
    Isolated nodes get an all-masked row.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    d = deg[nodes]
    k = len(nodes)
    cols = np.arange(size)[None, :]
    if deterministic:
        take = np.minimum(cols, padded.shape[1] - 1)
        idx = padded[nodes[:, None], np.broadcast_to(take, (k, size))]
        mask = (cols < d[:, None]).astype(np.float64)
    else:
        width = padded.shape[1]
        keys = rng.random((k, width))
        keys[np.arange(width)[None, :] >= d[:, None]] = np.inf
        perm = np.argsort(keys, axis=1)[:, :size] if width >= size else None
        repl = np.floor(rng.random((k, size)) * np.maximum(d, 1)[:, None]).astype(np.int64)
        if perm is not None:
            col = np.where((d >= size)[:, None], perm, repl)
        else:
            col = repl
        idx = padded[nodes[:, None], col]
        mask = np.broadcast_to((d > 0)[:, None], (k, size)).astype(np.float64)
    idx = np.where(mask > 0, idx, nodes[:, None])
    return Sample(idx.astype(np.int64), mask)


def masked_mean_forward(X, mask):
    """Mean over axis 1 of ``X`` (k, s, f) restricted to ``mask`` (k, s)."""
    cnt = np.maximum(mask.sum(axis=1), 1.0)
    w = mask / cnt[:, None]
    return np.einsum("ks,ksf->kf", w, X), w


def masked_max_forward(X, mask):
    """Max over axis 1 of non-negative ``X`` with masked slots zeroed."""
    Xm = X * mask[:, :, None]
    arg = Xm.argmax(axis=1)
    return np.take_along_axis(Xm, arg[:, None, :], axis=1)[:, 0, :], arg


def masked_max_backward(dout, arg, s):
    k, f = dout.shape
    dX = np.zeros((k, s, f))
    np.put_along_axis(dX, arg[:, None, :], dout[:, None, :], axis=1)
    return dX
