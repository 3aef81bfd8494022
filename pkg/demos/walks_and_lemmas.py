"""
Random walks and the lemmas behind them
=======================================

Checks the degree-balance identity of the walk transition matrix, the
convergence of P^t to the stationary distribution, and the spectrum of the
normalized transition matrix. Then samples first- and second-order walks.
"""

import json

import numpy as np

from grl_probe.generators import generate_er, path_graph
from grl_probe.lemmas import verify_lemmas
from grl_probe.walks import (PreconditionError, WalkParams, biased_walks, second_order_weights,
                             stationary_distribution, uniform_walks, verify_convergence)

g = generate_er(100, 0.1, seed=0)

# %%
# One call certifies everything at once and returns a JSON-able report.
report = verify_lemmas(g, t_max=20, t_converge=500)
print(json.dumps({k: v["passed"] for k, v in report["lemmas"].items()}, indent=2))

# %%
# A bipartite graph has no limiting distribution: the walk alternates sides.
try:
    verify_convergence(path_graph(6), 500)
except PreconditionError as exc:
    print("path graph:", exc)

# %%
# Uniform walks visit nodes in proportion to degree.
corpus = uniform_walks(g, WalkParams(num_walks=50, walk_length=80, seed=1))
visits = np.bincount(corpus.walks, minlength=g.num_nodes) / len(corpus.walks)
print("L1 distance of visit frequencies to pi:", round(np.abs(visits - stationary_distribution(g)).sum(), 3))

# %%
# Second-order step probabilities after prev -> cur. Returning is weighted 1/p,
# staying near prev 1 and moving outward 1/q, before normalizing.
prev, cur = g.edges[0]
w = second_order_weights(g, int(prev), int(cur), p=4.0, q=0.25)
print("step probabilities from", cur, ":", dict(list(w.items())[:6]))
walks = biased_walks(g, WalkParams(num_walks=2, walk_length=10, p_return=4.0, q_inout=0.25, seed=2))
print("first biased walk:", walks[0].tolist())
