"""Unsupervised GCN, GraphSAGE and GAT encoders on identity features.

Every encoder exposes the same three calls used by the trainer:

* ``plan(targets, rng)`` fixes all randomness of one forward pass,
* ``forward(params, plan)`` returns embeddings of the targets and a cache,
* ``backward(params, dZ, cache)`` returns a gradient dict keyed like params.

Training minimizes the shared proximity loss over edge minibatches with
SGD (optionally with momentum).
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from ..embedding import DivergenceError, EmbeddingMatrix
from ..graph import Graph
from . import layers as L

logger = logging.getLogger(__name__)

ARCHS = ("GCN", "SAGE_MEAN", "SAGE_MAXPOOL", "GAT")
MAX_DEGREE_GRID = (50, 100, 200)
S1_GRID = (25, 50, 100)
S2_GRID = (10, 20, 40)
HEADS_GRID = (4, 16, 32)


@dataclass(frozen=True)
class GnnConfig:
    arch: str = "GCN"
    dim: int = 128
    hidden_dim: int = 128
    layers: int = 2
    max_degree: int | None = 100
    sample_sizes: tuple = (25, 10)
    attention_heads: int = 4
    epochs: int = 5
    learning_rate: float = 0.1
    momentum: float = 0.0
    negatives: int = 5
    ns_exponent: float = 0.75
    batch_size: int = 256
    seed: int = 0
    init_scale: float = 1.0

    def __post_init__(self):
        arch = self.arch.upper().replace("-", "_")
        object.__setattr__(self, "arch", arch)
        object.__setattr__(self, "sample_sizes", tuple(self.sample_sizes))
        if arch not in ARCHS:
            raise ValueError(f"unknown architecture {self.arch!r}")
        if self.layers < 1 or self.dim < 1 or self.hidden_dim < 1:
            raise ValueError("layers and dims must be >= 1")
        if arch.startswith("SAGE") and self.layers != 2:
            raise ValueError("sampled GraphSAGE is defined for exactly 2 layers")
        if arch == "GAT":
            if self.attention_heads < 1:
                raise ValueError("attention_heads must be >= 1")
            for width in (self.hidden_dim, self.dim):
                if width % self.attention_heads:
                    raise ValueError(f"width {width} not divisible by {self.attention_heads} heads")

    @property
    def truncation(self):
        # GAT attends over the full neighborhood
        return None if self.arch == "GAT" else self.max_degree


def _glorot(rng, fan_in, fan_out, scale=1.0):
    lim = scale * np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=(fan_in, fan_out))


# --------------------------------------------------------------------------
# encoders


class GCNEncoder:
    def __init__(self, nbhd: L.Neighborhoods, config: GnnConfig):
        self.config = config
        self.n = nbhd.num_nodes
        self.A = L.gcn_norm(nbhd)
        self.widths = [self.n] + [config.hidden_dim] * (config.layers - 1) + [config.dim]

    def init_params(self, rng):
        p = {}
        for i in range(self.config.layers):
            p[f"W{i}"] = _glorot(rng, self.widths[i], self.widths[i + 1], self.config.init_scale)
            p[f"b{i}"] = np.zeros(self.widths[i + 1])
        return p

    def plan(self, targets, rng=None):
        return np.asarray(targets, dtype=np.int64)

    def forward(self, params, targets):
        H = None
        caches = []
        for i in range(self.config.layers):
            act = "relu" if i < self.config.layers - 1 else None
            H, c = L.gcn_layer_forward(H, self.A, params[f"W{i}"], params[f"b{i}"], act)
            caches.append(c)
        return H[targets], (targets, caches)

    def backward(self, params, dZ, cache):
        targets, caches = cache
        dH = np.zeros((self.n, self.widths[-1]))
        np.add.at(dH, targets, dZ)
        grads = {}
        for i in reversed(range(self.config.layers)):
            dH, grads[f"W{i}"], grads[f"b{i}"] = L.gcn_layer_backward(dH, caches[i])
        return grads


class GATEncoder:
    def __init__(self, nbhd: L.Neighborhoods, config: GnnConfig):
        self.config = config
        self.n = nbhd.num_nodes
        self.st = L.attention_structure(nbhd)
        self.widths = [self.n] + [config.hidden_dim] * (config.layers - 1) + [config.dim]

    def init_params(self, rng):
        k = self.config.attention_heads
        p = {}
        for i in range(self.config.layers):
            out = self.widths[i + 1]
            p[f"W{i}"] = _glorot(rng, self.widths[i], out, self.config.init_scale)
            p[f"as{i}"] = _glorot(rng, k, out // k)
            p[f"ad{i}"] = _glorot(rng, k, out // k)
            p[f"b{i}"] = np.zeros(out)
        return p

    def plan(self, targets, rng=None):
        return np.asarray(targets, dtype=np.int64)

    def forward(self, params, targets):
        H = None
        caches = []
        for i in range(self.config.layers):
            act = "relu" if i < self.config.layers - 1 else None
            H, c = L.gat_layer_forward(H, self.st, params[f"W{i}"], params[f"as{i}"],
                                       params[f"ad{i}"], params[f"b{i}"], act)
            caches.append(c)
        return H[targets], (targets, caches)

    def backward(self, params, dZ, cache):
        targets, caches = cache
        dH = np.zeros((self.n, self.widths[-1]))
        np.add.at(dH, targets, dZ)
        grads = {}
        for i in reversed(range(self.config.layers)):
            dH, grads[f"W{i}"], grads[f"as{i}"], grads[f"ad{i}"], grads[f"b{i}"] = \
                L.gat_layer_backward(dH, caches[i])
        return grads


@dataclass
class SagePlan:
    targets: np.ndarray
    hop1: L.Sample  # neighbors of targets
    layer1_nodes: np.ndarray  # nodes whose first-layer state is needed
    hop2: L.Sample  # neighbors of layer1_nodes
    pos_self: np.ndarray  # target -> row in layer1_nodes
    pos_hop1: np.ndarray  # hop1.idx -> row in layer1_nodes


class SAGEEncoder:
    """Two-layer GraphSAGE with mean or max-pooling aggregation.

    COMBINE is concatenation followed by one weight matrix, written as the
    sum of a self block and a neighbor block. The second layer is linear
    and its output is scaled to unit length.
    """

    def __init__(self, nbhd: L.Neighborhoods, config: GnnConfig, deterministic: bool = False):
        self.config = config
        self.n = nbhd.num_nodes
        self.nbhd = nbhd
        self.padded = nbhd.padded()
        self.deg = nbhd.degrees()
        self.pool = config.arch == "SAGE_MAXPOOL"
        self.deterministic = deterministic

    def init_params(self, rng):
        n, h, d, s = self.n, self.config.hidden_dim, self.config.dim, self.config.init_scale
        p = {"E_self": _glorot(rng, n, h, s), "b1": np.zeros(h), "W2s": _glorot(rng, h, d, s),
             "W2n": _glorot(rng, h, d, s), "b2": np.zeros(d)}
        if self.pool:
            p.update(P1=_glorot(rng, n, h, s), bp1=np.zeros(h), W1n=_glorot(rng, h, h, s),
                     Wp2=_glorot(rng, h, h, s), bp2=np.zeros(h))
        else:
            p["E_neigh"] = _glorot(rng, n, h, s)
        return p

    def plan(self, targets, rng=None):
        s1, s2 = self.config.sample_sizes
        targets = np.asarray(targets, dtype=np.int64)
        hop1 = L.sample_neighbors(self.padded, self.deg, targets, s1, rng, self.deterministic)
        nodes = np.unique(np.concatenate([targets, hop1.idx.ravel()]))
        hop2 = L.sample_neighbors(self.padded, self.deg, nodes, s2, rng, self.deterministic)
        return SagePlan(targets, hop1, nodes, hop2,
                        np.searchsorted(nodes, targets), np.searchsorted(nodes, hop1.idx))

    def forward(self, params, plan: SagePlan):
        c = {}
        U = plan.layer1_nodes
        m2 = plan.hop2.mask
        if self.pool:
            q_pre = params["P1"][plan.hop2.idx] + params["bp1"]
            agg1, arg1 = L.masked_max_forward(L.relu(q_pre), m2)
            pre1 = params["E_self"][U] + agg1 @ params["W1n"] + params["b1"]
            c.update(q_pre=q_pre, agg1=agg1, arg1=arg1)
        else:
            agg1, w1 = L.masked_mean_forward(params["E_neigh"][plan.hop2.idx], m2)
            pre1 = params["E_self"][U] + agg1 + params["b1"]
            c.update(w1=w1)
        h1 = L.relu(pre1)
        m1 = plan.hop1.mask
        nb1 = h1[plan.pos_hop1]
        if self.pool:
            q2_pre = nb1 @ params["Wp2"] + params["bp2"]
            agg2, arg2 = L.masked_max_forward(L.relu(q2_pre), m1)
            c.update(q2_pre=q2_pre, arg2=arg2)
        else:
            agg2, w2 = L.masked_mean_forward(nb1, m1)
            c.update(w2=w2)
        h_self = h1[plan.pos_self]
        z = h_self @ params["W2s"] + agg2 @ params["W2n"] + params["b2"]
        r = np.maximum(np.linalg.norm(z, axis=1, keepdims=True), 1e-12)
        out = z / r
        c.update(pre1=pre1, h1=h1, nb1=nb1, agg2=agg2, h_self=h_self, r=r, out=out, plan=plan)
        return out, c

    def backward(self, params, dout, c):
        plan = c["plan"]
        out, r = c["out"], c["r"]
        dz = (dout - out * (out * dout).sum(axis=1, keepdims=True)) / r
        g = {k: np.zeros_like(v) for k, v in params.items()}
        g["b2"] = dz.sum(axis=0)
        g["W2s"] = c["h_self"].T @ dz
        g["W2n"] = c["agg2"].T @ dz
        dagg2 = dz @ params["W2n"].T
        dh1 = np.zeros_like(c["h1"])
        np.add.at(dh1, plan.pos_self, dz @ params["W2s"].T)
        m1 = plan.hop1.mask
        if self.pool:
            dq2 = L.masked_max_backward(dagg2, c["arg2"], m1.shape[1]) * m1[:, :, None]
            dq2_pre = dq2 * (c["q2_pre"] > 0)
            g["bp2"] = dq2_pre.sum(axis=(0, 1))
            g["Wp2"] = np.einsum("ksf,ksg->fg", c["nb1"], dq2_pre)
            dnb1 = dq2_pre @ params["Wp2"].T
        else:
            dnb1 = c["w2"][:, :, None] * dagg2[:, None, :]
        np.add.at(dh1, plan.pos_hop1.ravel(), dnb1.reshape(-1, dnb1.shape[-1]))
        dpre1 = dh1 * (c["pre1"] > 0)
        U = plan.layer1_nodes
        g["b1"] = dpre1.sum(axis=0)
        g["E_self"][U] += dpre1
        m2 = plan.hop2.mask
        if self.pool:
            g["W1n"] = c["agg1"].T @ dpre1
            dagg1 = dpre1 @ params["W1n"].T
            dq = L.masked_max_backward(dagg1, c["arg1"], m2.shape[1]) * m2[:, :, None]
            dq_pre = dq * (c["q_pre"] > 0)
            g["bp1"] = dq_pre.sum(axis=(0, 1))
            np.add.at(g["P1"], plan.hop2.idx.ravel(), dq_pre.reshape(-1, dq_pre.shape[-1]))
        else:
            contrib = c["w1"][:, :, None] * dpre1[:, None, :]
            np.add.at(g["E_neigh"], plan.hop2.idx.ravel(), contrib.reshape(-1, contrib.shape[-1]))
        return g


def make_encoder(nbhd: L.Neighborhoods, config: GnnConfig, **kw):
    if config.arch == "GCN":
        return GCNEncoder(nbhd, config)
    if config.arch == "GAT":
        return GATEncoder(nbhd, config)
    return SAGEEncoder(nbhd, config, **kw)


# --------------------------------------------------------------------------
# objective


def proximity_loss(Z, pos_u, pos_v, neg):
    """Mean over pairs of ``-log s(z_u.z_v) - sum_k log s(-z_u.z_k)``.

    ``Z`` rows are indexed by the integer arrays; ``neg`` is (pairs, k).
    Returns the loss and its gradient w.r.t. ``Z``.
    """
    B = len(pos_u)
    zu, zv, zk = Z[pos_u], Z[pos_v], Z[neg]
    s_pos = (zu * zv).sum(axis=1)
    s_neg = np.einsum("bf,bkf->bk", zu, zk)
    loss = (np.logaddexp(0.0, -s_pos).sum() + np.logaddexp(0.0, s_neg).sum()) / B
    g_pos = (_sigmoid(s_pos) - 1.0) / B
    g_neg = _sigmoid(s_neg) / B
    dZ = np.zeros_like(Z)
    np.add.at(dZ, pos_u, g_pos[:, None] * zv + np.einsum("bk,bkf->bf", g_neg, zk))
    np.add.at(dZ, pos_v, g_pos[:, None] * zu)
    np.add.at(dZ, neg.ravel(), (g_neg[:, :, None] * zu[:, None, :]).reshape(-1, Z.shape[1]))
    return float(loss), dZ


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass
class Batch:
    u: np.ndarray
    v: np.ndarray
    neg: np.ndarray


def batch_loss(encoder, params, batch: Batch, rng=None, plan=None):
    """Loss, parameter gradients and the plan used for one minibatch."""
    nodes, inv = np.unique(np.concatenate([batch.u, batch.v, batch.neg.ravel()]), return_inverse=True)
    B = len(batch.u)
    pu, pv, pn = inv[:B], inv[B:2 * B], inv[2 * B:].reshape(batch.neg.shape)
    if plan is None:
        plan = encoder.plan(nodes, rng)
    Z, cache = encoder.forward(params, plan)
    loss, dZ = proximity_loss(Z, pu, pv, pn)
    return loss, encoder.backward(params, dZ, cache), plan


@dataclass
class TrainResult:
    params: dict
    epoch_loss: list = field(default_factory=list)
    grad_seen: dict = field(default_factory=dict)


def _noise_cdf(g, ns_exponent):
    w = np.maximum(g.degrees(), 1).astype(np.float64) ** ns_exponent
    c = np.cumsum(w)
    return c / c[-1]


def fit(g: Graph, config: GnnConfig, nbhd: L.Neighborhoods | None = None,
        track_grads: bool = False) -> tuple:
    if g.num_edges < 1:
        raise ValueError("training needs at least one edge")
    if nbhd is None:
        nbhd = L.identity_features(g, config.truncation, config.seed)
    rng = np.random.default_rng(config.seed)
    enc = make_encoder(nbhd, config)
    params = enc.init_params(rng)
    vel = {k: np.zeros_like(v) for k, v in params.items()}
    cdf = _noise_cdf(g, config.ns_exponent)
    edges = g.edges
    res = TrainResult(params)
    if track_grads:
        res.grad_seen = {k: np.zeros(v.shape, dtype=bool) for k, v in params.items()}
    last = None
    for epoch in range(config.epochs):
        order = rng.permutation(len(edges))
        flip = rng.random(len(edges)) < 0.5
        total, count = 0.0, 0
        for lo in range(0, len(edges), config.batch_size):
            idx = order[lo:lo + config.batch_size]
            e = edges[idx]
            u = np.where(flip[idx], e[:, 1], e[:, 0])
            v = np.where(flip[idx], e[:, 0], e[:, 1])
            neg = np.searchsorted(cdf, rng.random((len(idx), config.negatives)), side="right")
            neg = np.minimum(neg, g.num_nodes - 1)
            loss, grads, _ = batch_loss(enc, params, Batch(u, v, neg), rng)
            if not np.isfinite(loss):
                raise DivergenceError(f"GNN loss became non-finite in epoch {epoch} (last finite {last})", last)
            last = loss
            for k, gr in grads.items():
                if track_grads:
                    res.grad_seen[k] |= gr != 0
                vel[k] = config.momentum * vel[k] - config.learning_rate * gr
                params[k] += vel[k]
            total += loss * len(idx)
            count += len(idx)
        res.epoch_loss.append(total / count)
        logger.debug("%s epoch %d loss %.4f", config.arch, epoch, res.epoch_loss[-1])
    return enc, res


def embed_all(enc, params, n, seed=0, chunk=512):
    rng = np.random.default_rng(seed)
    out = []
    for lo in range(0, n, chunk):
        nodes = np.arange(lo, min(n, lo + chunk))
        Z, _ = enc.forward(params, enc.plan(nodes, rng))
        out.append(Z)
    return np.vstack(out)


def train_unsupervised(g: Graph, config: GnnConfig) -> EmbeddingMatrix:
    """Train an encoder on the proximity objective; embeddings for all nodes."""
    enc, res = fit(g, config)
    Z = embed_all(enc, res.params, g.num_nodes, config.seed + 1)
    meta = {
        "method": config.arch.lower().replace("_", "-"),
        "config": asdict(config),
        "graph": g.fingerprint(),
        "optimizer": f"sgd(lr={config.learning_rate}, momentum={config.momentum})",
        "concurrency": "serial",
        "epoch_loss": res.epoch_loss,
    }
    if config.arch == "GAT":
        meta["note"] = "GAT trained with the shared unsupervised proximity loss"
    return EmbeddingMatrix(Z, meta, loss_trace=np.array(res.epoch_loss))


def sage_forward(g: Graph, config: GnnConfig, minibatch, params=None, deterministic=False, seed=0):
    """Embeddings of ``minibatch`` nodes from a (possibly untrained) SAGE encoder."""
    nbhd = L.identity_features(g, config.truncation, config.seed)
    enc = SAGEEncoder(nbhd, config, deterministic=deterministic)
    rng = np.random.default_rng(seed)
    if params is None:
        params = enc.init_params(np.random.default_rng(config.seed))
    Z, _ = enc.forward(params, enc.plan(minibatch, rng))
    return Z
