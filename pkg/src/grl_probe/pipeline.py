"""Experiment configuration, sweep enumeration, resumable execution and reports."""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import skipgram as sg
from .embedding import EmbeddingMatrix
from .evaluation import (PROPERTY_TASKS, TASKS, ForestGrid, SplitSpec, TaskSkipped, edge_split,
                         link_prediction_auc, property_task)
from .forest import DEPTH_GRID, N_TREES_GRID
from .generators import GeneratorSpec
from .gnn.models import HEADS_GRID, MAX_DEGREE_GRID, S1_GRID, S2_GRID, GnnConfig, train_unsupervised
from .graph import Graph, largest_connected_component, load_edge_list
from .metrics import property_table
from .walks import WalkParams

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
RESULT_COLUMNS = ("dataset", "generator_params", "method", "hyperparam_json", "task", "metric",
                  "value", "seed", "wallclock_s")
SHALLOW = ("DeepWalk", "Node2Vec")
GNN = ("GCN", "SAGE_MEAN", "SAGE_MAXPOOL", "GAT")
METHODS = SHALLOW + GNN

DEFAULT_GRIDS = {
    "DeepWalk": {"ns_exponent": sg.NS_GRID, "subsample_freq": sg.SFREQ_GRID, "dim": sg.DIM_GRID},
    "Node2Vec": {"q_inout": sg.Q_GRID, "p_return": sg.P_GRID, "dim": sg.DIM_GRID},
    "GCN": {"max_degree": MAX_DEGREE_GRID, "dim": sg.DIM_GRID},
    "SAGE_MEAN": {"max_degree": MAX_DEGREE_GRID, "s1": S1_GRID, "s2": S2_GRID, "dim": sg.DIM_GRID},
    "SAGE_MAXPOOL": {"max_degree": MAX_DEGREE_GRID, "s1": S1_GRID, "s2": S2_GRID, "dim": sg.DIM_GRID},
    "GAT": {"attention_heads": HEADS_GRID, "dim": sg.DIM_GRID},
}
# values used when a grid dimension is frozen (pre-search, single runs)
METHOD_DEFAULTS = {
    "DeepWalk": {"ns_exponent": 0.75, "subsample_freq": 0.0, "dim": 128, "window": 10},
    "Node2Vec": {"p_return": 1.0, "q_inout": 1.0, "dim": 128, "window": 10},
    "GCN": {"max_degree": 100, "dim": 128},
    "SAGE_MEAN": {"max_degree": 100, "s1": 25, "s2": 10, "dim": 128},
    "SAGE_MAXPOOL": {"max_degree": 100, "s1": 25, "s2": 10, "dim": 128},
    "GAT": {"attention_heads": 4, "dim": 128},
}
PRESEARCH_GRID = {"num_walks": (5, 8, 10, 32, 64), "walk_length": (5, 25, 40, 80),
                  "epochs": (1, 2, 3, 4, 5, 8, 10)}

_SHALLOW_KEYS = {"dim", "window", "negatives", "ns_exponent", "subsample_freq", "epochs",
                 "learning_rate", "workers", "num_walks", "walk_length", "p_return", "q_inout"}
_GNN_KEYS = {"dim", "hidden_dim", "max_degree", "s1", "s2", "attention_heads", "epochs",
             "learning_rate", "momentum", "negatives", "ns_exponent", "batch_size", "init_scale"}


class ConfigError(ValueError):
    pass


class ReportError(ValueError):
    pass


def canonical_method(name: str) -> str:
    key = str(name).replace("-", "_").replace(" ", "_").upper()
    for m in METHODS:
        if m.upper() == key:
            return m
    aliases = {"SAGE": "SAGE_MEAN", "GRAPHSAGE": "SAGE_MEAN", "N2V": "Node2Vec", "DW": "DeepWalk"}
    if key in aliases:
        return aliases[key]
    raise ConfigError(f"unknown method {name!r}")


def _check_value(key, v):
    positive_int = {"dim", "hidden_dim", "max_degree", "s1", "s2", "attention_heads", "epochs",
                    "num_walks", "walk_length", "window", "negatives", "batch_size", "workers"}
    if key in positive_int:
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"{key} must be a positive integer, got {v!r}")
    elif key in ("p_return", "q_inout", "learning_rate", "init_scale"):
        if not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError(f"{key} must be > 0, got {v!r}")
    elif key == "subsample_freq":
        if not isinstance(v, (int, float)) or not 0 <= v < 1:
            raise ConfigError(f"subsample_freq must be in [0, 1), got {v!r}")
    elif key in ("ns_exponent", "momentum"):
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{key} must be a finite number, got {v!r}")


@dataclass
class MethodSpec:
    name: str
    grid: dict
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        self.name = canonical_method(self.name)
        allowed = _SHALLOW_KEYS if self.name in SHALLOW else _GNN_KEYS
        for src in (self.grid, self.fixed):
            bad = set(src) - allowed
            if bad:
                raise ConfigError(f"{self.name}: unknown hyperparameters {sorted(bad)}")
        grid = {}
        for k, vals in self.grid.items():
            vals = list(vals) if isinstance(vals, (list, tuple)) else [vals]
            if not vals:
                raise ConfigError(f"{self.name}: grid dimension {k!r} is empty")
            for v in vals:
                _check_value(k, v)
            grid[k] = vals
        for k, v in self.fixed.items():
            _check_value(k, v)
        self.grid = grid

    def points(self):
        keys = list(self.grid)
        for combo in itertools.product(*(self.grid[k] for k in keys)):
            yield dict(zip(keys, combo))

    @property
    def size(self) -> int:
        return math.prod(len(v) for v in self.grid.values())


@dataclass
class DatasetSpec:
    name: str
    generator: GeneratorSpec | None = None
    path: str | None = None

    def describe(self) -> dict:
        if self.generator is not None:
            return self.generator.to_dict()
        return {"path": str(self.path)}

    def load(self, largest_component: bool = False) -> Graph:
        g = self.generator.generate() if self.generator is not None else load_edge_list(self.path)
        return largest_connected_component(g) if largest_component else g


@dataclass
class ExperimentConfig:
    datasets: list
    methods: list
    tasks: tuple = TASKS
    seeds: tuple = (0,)
    walk: dict = field(default_factory=lambda: {"num_walks": 10, "walk_length": 80, "epochs": 1})
    gnn_epochs: int = 5
    forest: ForestGrid = ForestGrid()
    output_dir: str = "results"
    pre_search: dict | None = None
    largest_component: bool = False
    save_embeddings: bool = False

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("no datasets configured")
        if not self.methods:
            raise ConfigError("no methods configured")
        self.tasks = tuple(self.tasks)
        if not self.tasks:
            raise ConfigError("no tasks configured")
        bad = set(self.tasks) - set(TASKS)
        if bad:
            raise ConfigError(f"unknown tasks {sorted(bad)}")
        self.seeds = tuple(self.seeds)
        if not self.seeds:
            raise ConfigError("no seeds configured")
        for k, v in self.walk.items():
            if k not in ("num_walks", "walk_length", "epochs"):
                raise ConfigError(f"unknown walk setting {k!r}")
            _check_value(k, v)
        _check_value("epochs", self.gnn_epochs)
        if self.pre_search is not None:
            for k, vals in self.pre_search.items():
                if k not in PRESEARCH_GRID:
                    raise ConfigError(f"unknown pre-search dimension {k!r}")
                if not vals:
                    raise ConfigError(f"pre-search dimension {k!r} is empty")
                for v in vals:
                    _check_value(k, v)
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError("dataset names must be unique")

    @property
    def sweep_size(self) -> int:
        return len(self.datasets) * sum(m.size for m in self.methods) * len(self.seeds)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        raw = dict(raw)
        version = raw.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
        known = {"datasets", "methods", "tasks", "seeds", "walk", "gnn_epochs", "forest",
                 "output_dir", "pre_search", "largest_component", "save_embeddings"}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        try:
            datasets = [_dataset_from(d, base_dir) for d in raw.get("datasets") or []]
            methods = _methods_from(raw.get("methods") or {})
            forest = ForestGrid(**(raw.get("forest") or {}))
            forest = ForestGrid(tuple(forest.n_trees), tuple(forest.depths), forest.seed,
                                forest.feature_subset, forest.min_samples_split)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        out = raw.get("output_dir", "results")
        if base_dir is not None and not Path(out).is_absolute():
            out = str(base_dir / out)
        return cls(
            datasets=datasets, methods=methods,
            tasks=tuple(raw.get("tasks", TASKS)), seeds=tuple(raw.get("seeds", (0,))),
            walk={"num_walks": 10, "walk_length": 80, "epochs": 1, **(raw.get("walk") or {})},
            gnn_epochs=raw.get("gnn_epochs", 5), forest=forest, output_dir=out,
            pre_search=raw.get("pre_search"), largest_component=bool(raw.get("largest_component", False)),
            save_embeddings=bool(raw.get("save_embeddings", False)),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw, path.parent)


def _dataset_from(d, base_dir):
    if not isinstance(d, dict):
        raise ConfigError(f"dataset entry must be a mapping, got {d!r}")
    if "generator" in d:
        spec = GeneratorSpec(**d["generator"])
        return DatasetSpec(d.get("name", spec.name), generator=spec)
    if "path" in d:
        p = Path(d["path"])
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        return DatasetSpec(d.get("name", p.stem), path=str(p))
    raise ConfigError("dataset needs either 'generator' or 'path'")


def _methods_from(raw):
    if isinstance(raw, list):
        raw = {m: None for m in raw} if all(isinstance(m, str) for m in raw) else \
            {m["name"]: m for m in raw}
    out = []
    for name, body in raw.items():
        body = body or {}
        canon = canonical_method(name)
        grid = body.get("grid", DEFAULT_GRIDS[canon])
        out.append(MethodSpec(canon, dict(grid), dict(body.get("fixed") or {})))
    return out


def content_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(f"not serializable: {type(o)}")


@dataclass(frozen=True)
class RunDescriptor:
    dataset: str
    dataset_params: dict
    method: str
    hyperparams: dict
    seed: int
    tasks: tuple

    @property
    def run_id(self) -> str:
        return run_key(self.dataset, self.dataset_params, self.method, self.hyperparams, self.seed)

    @property
    def hyperparam_json(self) -> str:
        return json.dumps(self.hyperparams, sort_keys=True, default=_json_default)


def run_key(dataset, dataset_params, method, hyperparams, seed) -> str:
    return content_hash({"dataset": dataset, "params": dataset_params, "method": method,
                         "hp": hyperparams, "seed": int(seed)})


def _resolved_hyperparams(config: ExperimentConfig, method: MethodSpec, point: dict, frozen=None) -> dict:
    if method.name in SHALLOW:
        hp = {**METHOD_DEFAULTS[method.name], **config.walk, **(frozen or {})}
    else:
        hp = {**METHOD_DEFAULTS[method.name], "epochs": (frozen or {}).get("epochs", config.gnn_epochs)}
    hp.update(method.fixed)
    hp.update(point)
    return hp


def enumerate_sweep(config: ExperimentConfig, frozen_walks: dict | None = None) -> list:
    """All dataset x method x grid point x seed runs, in a fixed order."""
    runs = []
    for ds in config.datasets:
        for method in config.methods:
            walk = (frozen_walks or {}).get(f"{ds.name}|{method.name}")
            for point in method.points():
                hp = _resolved_hyperparams(config, method, point, walk)
                for seed in config.seeds:
                    runs.append(RunDescriptor(ds.name, ds.describe(), method.name, hp, int(seed), config.tasks))
    return runs


def embed(g: Graph, method: str, hp: dict, seed: int = 0) -> EmbeddingMatrix:
    """Train one embedding model named by ``method`` with hyperparameters ``hp``."""
    method = canonical_method(method)
    hp = {**METHOD_DEFAULTS[method], **hp}
    if method in SHALLOW:
        walk = WalkParams(num_walks=hp.get("num_walks", 10), walk_length=hp.get("walk_length", 80),
                          p_return=hp.get("p_return", 1.0), q_inout=hp.get("q_inout", 1.0), seed=seed)
        cfg = sg.SkipGramConfig(dim=hp["dim"], window=hp.get("window", 10), negatives=hp.get("negatives", 5),
                                ns_exponent=hp.get("ns_exponent", 0.75),
                                subsample_freq=hp.get("subsample_freq", 0.0), epochs=hp.get("epochs", 1),
                                learning_rate=hp.get("learning_rate", 0.025), seed=seed,
                                workers=hp.get("workers", 1))
        return sg.deepwalk(g, walk, cfg) if method == "DeepWalk" else sg.node2vec(g, walk, cfg)
    dim = hp["dim"]
    kw = {k: hp[k] for k in ("learning_rate", "momentum", "negatives", "ns_exponent", "batch_size",
                             "init_scale") if k in hp}
    cfg = GnnConfig(arch=method, dim=dim, hidden_dim=hp.get("hidden_dim", dim),
                    max_degree=hp.get("max_degree", 100),
                    sample_sizes=(hp.get("s1", 25), hp.get("s2", 10)),
                    attention_heads=hp.get("attention_heads", 4), epochs=hp.get("epochs", 5), seed=seed, **kw)
    return train_unsupervised(g, cfg)


def graph_stats(g: Graph, table) -> dict:
    s = dict(table.graph_stats)
    return {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in s.items()}


_DATA_CACHE: dict = {}


def _dataset_bundle(ds: DatasetSpec, largest_component: bool):
    key = (ds.name, json.dumps(ds.describe(), sort_keys=True), largest_component)
    if key not in _DATA_CACHE:
        g = ds.load(largest_component)
        # community ground truth is fixed per dataset, independent of run seeds
        _DATA_CACHE.clear()
        _DATA_CACHE[key] = (g, property_table(g, seed=0))
    return _DATA_CACHE[key]


def execute_run(run: RunDescriptor, ds: DatasetSpec, forest: ForestGrid, largest_component=False,
                tasks=None, embed_dir=None) -> dict:
    """Run one descriptor; returns rows, skipped-task notes and model counts."""
    g, table = _dataset_bundle(ds, largest_component)
    tasks = tuple(run.tasks if tasks is None else tasks)
    gp = json.dumps({**run.dataset_params, "stats": graph_stats(g, table)}, sort_keys=True,
                    default=_json_default)
    base = {"dataset": run.dataset, "generator_params": gp, "method": run.method,
            "hyperparam_json": run.hyperparam_json, "seed": run.seed}
    rows, notes, models = [], [], 0
    if "link_prediction" in tasks:
        t0 = time.perf_counter()
        split = edge_split(g, SplitSpec("edge", 0.9, run.seed))
        emb = embed(split.train, run.method, run.hyperparams, run.seed)
        models += 1
        auc = link_prediction_auc(emb, split.positives, split.negatives)
        rows.append({**base, "task": "link_prediction", "metric": "AUC", "value": auc,
                     "wallclock_s": time.perf_counter() - t0})
    prop = [t for t in tasks if t in PROPERTY_TASKS]
    forests = 0
    if prop:
        t0 = time.perf_counter()
        emb = embed(g, run.method, run.hyperparams, run.seed)
        models += 1
        if embed_dir is not None:
            emb.write(Path(embed_dir) / f"{run.run_id}.emb", g.labels)
        shared = time.perf_counter() - t0
        for task in prop:
            t1 = time.perf_counter()
            metric = "MicroF1" if task == "community" else "R2"
            try:
                res = property_task(emb, table, task, forest, SplitSpec("node", 0.9, run.seed))
                value = res.value
                forests += 1
            except TaskSkipped as exc:
                value = float("nan")
                notes.append({"run_id": run.run_id, "task": task, "skipped": str(exc)})
            rows.append({**base, "task": task, "metric": metric, "value": value,
                         "wallclock_s": shared / len(prop) + time.perf_counter() - t1})
    return {"rows": rows, "notes": notes, "embedding_models": models, "forest_fits": forests}


def _worker(args):
    run, ds, forest, lcc, tasks, embed_dir = args
    try:
        return run.run_id, execute_run(run, ds, forest, lcc, tasks, embed_dir), None
    except Exception as exc:  # recorded, the sweep continues
        logger.exception("run %s failed", run.run_id)
        return run.run_id, None, f"{type(exc).__name__}: {exc}"


def read_results(path) -> list:
    path = Path(path)
    if not path.exists():
        return []
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def _row_run_id(row) -> str:
    params = json.loads(row["generator_params"])
    params.pop("stats", None)
    return run_key(row["dataset"], params, row["method"], json.loads(row["hyperparam_json"]), int(row["seed"]))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("GRL_PROBE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class SweepSummary:
    planned: int
    executed: int
    skipped: int
    failed: int
    embedding_models: int
    forest_fits: int
    results_path: Path

    def as_dict(self):
        d = dict(self.__dict__)
        d["results_path"] = str(self.results_path)
        return d


class _Appender:
    """Single writer for the results CSV; rows of one run land together."""

    def __init__(self, path: Path):
        self.path = path
        new = not path.exists() or path.stat().st_size == 0
        self.fh = path.open("a", newline="")
        self.w = csv.DictWriter(self.fh, fieldnames=RESULT_COLUMNS)
        if new:
            self.w.writeheader()
            self.fh.flush()

    def write(self, rows):
        for r in rows:
            r = dict(r)
            r["value"] = repr(float(r["value"]))
            r["wallclock_s"] = f"{max(float(r['wallclock_s']), 1e-9):.6g}"
            self.w.writerow(r)
        self.fh.flush()
        os.fsync(self.fh.fileno())

    def close(self):
        self.fh.close()


def pre_search(config: ExperimentConfig, out: Path) -> dict:
    """Pick walk settings per (dataset, method) with other hyperparameters at defaults.

    Winners are stored in ``presearch.json`` and reused on later calls.
    """
    path = out / "presearch.json"
    frozen = json.loads(path.read_text()) if path.exists() else {}
    grid = {k: list(v) for k, v in (config.pre_search or {}).items()}
    task = "link_prediction" if "link_prediction" in config.tasks else config.tasks[0]
    for ds in config.datasets:
        for method in config.methods:
            key = f"{ds.name}|{method.name}"
            if key in frozen:
                continue
            dims = {k: v for k, v in grid.items() if method.name in SHALLOW or k == "epochs"}
            if not dims:
                continue
            base = dict(config.walk) if method.name in SHALLOW else {"epochs": config.gnn_epochs}
            best, best_val = None, -math.inf
            for combo in itertools.product(*dims.values()):
                walk = {**base, **dict(zip(dims, combo))}
                hp = {**METHOD_DEFAULTS[method.name], **method.fixed, **walk}
                run = RunDescriptor(ds.name, ds.describe(), method.name, hp, config.seeds[0], (task,))
                res = execute_run(run, ds, config.forest, config.largest_component)
                val = res["rows"][0]["value"]
                if val > best_val:
                    best, best_val = walk, val
            frozen[key] = best
            path.write_text(json.dumps(frozen, indent=2, sort_keys=True))
    return frozen


def run_sweep(config: ExperimentConfig, max_runs: int | None = None, workers: int | None = None) -> SweepSummary:
    """Execute every pending run; completed (run id, task) pairs are skipped.

    ``max_runs`` stops after that many executions, which is how tests
    simulate an interrupted sweep.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = out / "results.csv"
    done = {}
    for row in read_results(results):
        done.setdefault(_row_run_id(row), set()).add(row["task"])
    frozen = pre_search(config, out) if config.pre_search else None
    runs = enumerate_sweep(config, frozen)
    logger.info("sweep: %d runs planned", len(runs))
    by_name = {d.name: d for d in config.datasets}
    embed_dir = None
    if config.save_embeddings:
        embed_dir = out / "embeddings"
        embed_dir.mkdir(exist_ok=True)
    jobs = []
    skipped = 0
    for run in runs:
        missing = tuple(t for t in run.tasks if t not in done.get(run.run_id, ()))
        if not missing:
            skipped += 1
            continue
        jobs.append((run, by_name[run.dataset], config.forest, config.largest_component, missing, embed_dir))
    if max_runs is not None:
        jobs = jobs[:max_runs]
    workers = workers or worker_count()
    appender = _Appender(results)
    failures = out / "failures.jsonl"
    summary = SweepSummary(len(runs), 0, skipped, 0, 0, 0, results)

    def consume(run_id, res, err):
        summary.executed += 1
        if err is not None:
            summary.failed += 1
            with failures.open("a") as fh:
                fh.write(json.dumps({"run_id": run_id, "error": err}) + "\n")
            return
        appender.write(res["rows"])
        summary.embedding_models += res["embedding_models"]
        summary.forest_fits += res["forest_fits"]
        if res["notes"]:
            with failures.open("a") as fh:
                for n in res["notes"]:
                    fh.write(json.dumps(n) + "\n")

    try:
        if workers <= 1 or len(jobs) <= 1:
            for job in jobs:
                consume(*_worker(job))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_worker, job) for job in jobs]
                for fut in as_completed(futures):
                    consume(*fut.result())
    finally:
        appender.close()
    return summary


# --------------------------------------------------------------------------- report

def _family(params: dict) -> str:
    return params.get("family", "file")


def report(results_csv, out_dir=None) -> dict:
    """Best-per-grid tables and SVG charts built from the results CSV alone."""
    path = Path(results_csv)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in RESULT_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ReportError(f"results file lacks columns {missing}")
        rows = list(reader)
    if not rows:
        raise ReportError("results file has no rows")
    out = Path(out_dir) if out_dir is not None else path.parent / "report"
    out.mkdir(parents=True, exist_ok=True)

    for r in rows:
        r["value"] = float(r["value"])
        r["params"] = json.loads(r["generator_params"])
        r["hp"] = json.loads(r["hyperparam_json"])
    valid = [r for r in rows if math.isfinite(r["value"])]

    best = {}
    for r in valid:
        key = (r["dataset"], r["method"], r["task"])
        if key not in best or r["value"] > best[key]["value"]:
            best[key] = r
    best_rows = [{"dataset": k[0], "method": k[1], "task": k[2], "metric": r["metric"],
                  "value": r["value"], "hyperparam_json": r["hyperparam_json"]}
                 for k, r in sorted(best.items())]
    with (out / "best.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["dataset", "method", "task", "metric", "value", "hyperparam_json"])
        w.writeheader()
        w.writerows(best_rows)

    figures = []
    for task in sorted({r["task"] for r in best_rows}):
        data = [r for r in best_rows if r["task"] == task]
        figures.append(_bar_chart(out / f"best_{task}.svg", task, data))

    # hyperparameter sensitivity, averaged per generator family
    hp_lines = {}
    for r in valid:
        for k, v in r["hp"].items():
            hp_lines.setdefault((r["method"], k, r["task"]), {}).setdefault(_family(r["params"]), {}) \
                .setdefault(v, []).append(r["value"])
    for (method, k, task), fams in sorted(hp_lines.items(), key=lambda kv: tuple(map(str, kv[0]))):
        if max(len(x) for x in fams.values()) < 2:
            continue
        series = {fam: sorted((x, float(np.mean(v))) for x, v in pts.items()) for fam, pts in fams.items()}
        figures.append(_line_chart(out / f"hyper_{method}_{k}_{task}.svg",
                                   f"{method}: {task} vs {k}", k, series))

    # performance against graph statistics
    for stat in ("transitivity", "density", "avg_clustering"):
        for task in sorted({r["task"] for r in best_rows}):
            series = {}
            for (ds, method, t), r in best.items():
                s = r["params"].get("stats", {}).get(stat)
                if t == task and s is not None:
                    series.setdefault(method, []).append((float(s), r["value"]))
            if any(len(v) >= 1 for v in series.values()):
                series = {m: sorted(v) for m, v in series.items()}
                figures.append(_line_chart(out / f"stat_{stat}_{task}.svg",
                                           f"{task} vs {stat}", stat, series))

    runs = {}
    for r in rows:
        rid = _row_run_id(r)
        kinds = runs.setdefault(rid, set())
        kinds.add("link" if r["task"] == "link_prediction" else "property")
    counts = {
        "runs": len(runs),
        "embedding_models": sum(len(k) for k in runs.values()),
        "forest_fits": sum(1 for r in valid if r["task"] != "link_prediction"),
    }
    summary = {"best": best_rows, "figures": [str(f) for f in figures], "counts": counts}
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def _svg_metadata(title, data):
    return {"Title": title, "Description": json.dumps(data, default=_json_default)}


def _bar_chart(path, task, data):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    datasets = sorted({d["dataset"] for d in data})
    methods = sorted({d["method"] for d in data})
    width = 0.8 / max(1, len(methods))
    fig, ax = plt.subplots(figsize=(max(4, 1.5 * len(datasets) + 2), 3.5))
    for i, m in enumerate(methods):
        xs, ys = [], []
        for j, ds in enumerate(datasets):
            for d in data:
                if d["dataset"] == ds and d["method"] == m:
                    xs.append(j + i * width)
                    ys.append(d["value"])
        ax.bar(xs, ys, width=width, label=m)
    ax.set_xticks([j + 0.4 - width / 2 for j in range(len(datasets))])
    ax.set_xticklabels(datasets, rotation=20, ha="right")
    ax.set_ylabel(data[0]["metric"] if data else "")
    ax.set_title(f"best {task}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_svg_metadata(f"best {task}", data))
    plt.close(fig)
    return path


def _line_chart(path, title, xlabel, series):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for name, pts in sorted(series.items()):
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ax.plot(xs, ys, marker="o", label=name)
    ax.set_xlabel(xlabel)
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=7)
    fig.tight_layout()
    data = {name: [{"x": x, "y": y} for x, y in pts] for name, pts in series.items()}
    fig.savefig(path, format="svg", metadata=_svg_metadata(title, data))
    plt.close(fig)
    return path


def default_config_dict(output_dir="results") -> dict:
    """A runnable starting point for ``grl-probe sweep``."""
    return {
        "schema_version": SCHEMA_VERSION,
        "output_dir": output_dir,
        "seeds": [0],
        "tasks": list(TASKS),
        "datasets": [{"generator": {"family": "BA", "n": 1000, "m": 5, "seed": 0}}],
        "methods": {m: {"grid": {k: list(v) for k, v in DEFAULT_GRIDS[m].items()}} for m in METHODS},
        "walk": {"num_walks": 10, "walk_length": 80, "epochs": 1},
        "gnn_epochs": 5,
        "forest": {"n_trees": list(N_TREES_GRID), "depths": list(DEPTH_GRID)},
    }
