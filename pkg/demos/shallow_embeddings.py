"""
DeepWalk and Node2Vec
=====================

Skip-gram embeddings trained on walk corpora. Two disjoint cliques make the
homophily effect plain; a Barabasi-Albert graph gives a harder link
prediction problem.
"""

import numpy as np

from grl_probe.evaluation import SplitSpec, edge_split, link_prediction_auc
from grl_probe.generators import generate_ba, two_cliques
from grl_probe.skipgram import SkipGramConfig, deepwalk, node2vec
from grl_probe.walks import WalkParams

g = two_cliques(8)
labels = np.repeat([0, 1], 8)
cfg = SkipGramConfig(dim=16, window=5, epochs=5, seed=0)

for name, fn, walk in (("DeepWalk", deepwalk, WalkParams(10, 40, seed=0)),
                       ("Node2Vec", node2vec, WalkParams(10, 40, p_return=1.0, q_inout=0.5, seed=0))):
    Z = fn(g, walk, cfg).vectors
    D = Z @ Z.T
    same = labels[:, None] == labels[None, :]
    across = ~same
    np.fill_diagonal(same, False)
    print(f"{name}: mean dot product within cliques {D[same].mean():.2f}, across {D[across].mean():.2f}")

# %%
# Inside a clique every other neighbor of the current node is also adjacent
# to the previous one, so q never comes into play and Node2Vec walks match
# DeepWalk walks.

# %%
# Link prediction: hold out 10% of the edges, embed the rest, score held-out
# pairs against sampled non-edges by dot product.
ba = generate_ba(1000, 5, seed=0)
split = edge_split(ba, SplitSpec("edge", 0.9, seed=0))
emb = deepwalk(split.train, WalkParams(10, 40, seed=0), SkipGramConfig(dim=32, window=10, seed=0))
print("DeepWalk link AUC on BA(1000, 5):", round(link_prediction_auc(emb, split.positives, split.negatives), 3))
print("loss trace (first, last):", emb.loss_trace[0].round(3), emb.loss_trace[-1].round(3))
