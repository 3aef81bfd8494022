"""
When mean and max cannot tell neighborhoods apart
=================================================

Mean aggregation ignores scaling of multiplicities, max aggregation ignores
multiplicities altogether. Sum sees both.
"""

import numpy as np

from grl_probe import multiset as ms
from grl_probe.generators import generate_ba

a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
x1 = ms.Multiset([a, b])
x2 = ms.mean_collision_witness(x1, 3)
x3 = ms.max_collision_witness(x1, [1, 4])
for how in ms.AGGREGATORS:
    print(f"{how:4s}  X1 vs 3*X1: {ms.collides(x1, x2, how)!s:5s}  X1 vs (a, b, b, b, b): {ms.collides(x1, x3, how)}")

# %%
# Every multiset of size <= 4 over three symbols, every pair compared.
rep = ms.exhaustive_check(3, 4)
print({k: rep[k] for k in ("multisets", "pairs", "mean", "max", "sum")})

# %%
# On a real graph: how often do two different neighborhoods aggregate to the
# same vector? Degree one-hot features make the failure of mean and max common.
g = generate_ba(300, 2, seed=0)
for name, X in (("degree one-hot", ms.degree_onehot(g)), ("constant", np.ones((g.num_nodes, 1))),
                ("random 16-dim", np.random.default_rng(0).random((g.num_nodes, 16)))):
    rates = {how: round(ms.neighborhood_collision_rate(g, X, how), 5) for how in ms.AGGREGATORS}
    print(f"{name:15s} {rates}")
