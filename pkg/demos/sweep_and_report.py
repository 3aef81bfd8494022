"""
A small resumable sweep
=======================

The same workflow the ``grl-probe sweep`` and ``grl-probe report``
subcommands run, on a grid small enough to finish in under a minute.
"""

import json
from pathlib import Path

import yaml

from grl_probe.pipeline import ExperimentConfig, default_config_dict, report, run_sweep

out = Path("demo_output")
out.mkdir(exist_ok=True)

raw = default_config_dict(str((out / "sweep").resolve()))
raw["datasets"] = [{"generator": {"family": "BA", "n": 200, "m": 2, "seed": 0}},
                   {"generator": {"family": "HK", "n": 200, "m": 2, "p": 0.8, "seed": 0}}]
raw["methods"] = {"DeepWalk": {"grid": {"dim": [16, 32]}}, "GCN": {"grid": {"dim": [16]}}}
raw["walk"] = {"num_walks": 5, "walk_length": 20, "epochs": 1}
raw["forest"] = {"n_trees": [50], "depths": [8]}
(out / "sweep.yaml").write_text(yaml.safe_dump(raw, sort_keys=False))

config = ExperimentConfig.load(out / "sweep.yaml")
print("planned runs:", config.sweep_size)

# %%
# Stop after two runs, then resume; the second call only does the rest.
print(run_sweep(config, max_runs=2).as_dict())
print(run_sweep(config).as_dict())

summary = report(out / "sweep" / "results.csv")
print(json.dumps(summary["counts"]))
print("\n".join(summary["figures"][:5]))
