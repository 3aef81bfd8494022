"""
Probing embeddings with random forests
======================================

A forest predicts graph properties from node embeddings. One forest grown
at the largest grid point answers every (trees, depth) pair exactly.
"""

import numpy as np

from grl_probe.evaluation import PROPERTY_TASKS, property_task
from grl_probe.forest import ForestConfig, fit_regressor
from grl_probe.generators import generate_ba
from grl_probe.metrics import property_table
from grl_probe.skipgram import SkipGramConfig, deepwalk
from grl_probe.walks import WalkParams

g = generate_ba(1000, 5, seed=0)
table = property_table(g, seed=0)
Z = deepwalk(g, WalkParams(10, 40, seed=0), SkipGramConfig(dim=32, window=10, seed=0))

for task in PROPERTY_TASKS:
    res = property_task(Z, table, task)
    print(f"{task:24s} {res.metric:7s} {res.value:6.3f}  best grid point {res.details['best']}")

# %%
# Truncating a deep forest equals growing a shallow one.
rng = np.random.default_rng(0)
X, y = rng.normal(size=(300, 5)), rng.normal(size=300)
big = fit_regressor(X, y, ForestConfig(n_trees=50, max_depth=12, seed=1))
small = fit_regressor(X, y, ForestConfig(n_trees=20, max_depth=8, seed=1))
print("prefix/depth truncation exact:", np.array_equal(big.predict(X, n_trees=20, max_depth=8), small.predict(X)))
