"""``grl-probe`` command line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import multiset as ms
from .embedding import EmbeddingMatrix
from .evaluation import TASKS, ForestGrid, SplitSpec, TaskSkipped, property_task
from .generators import GeneratorSpec
from .graph import GraphError, load_edge_list, write_edge_list
from .lemmas import verify_lemmas
from .metrics import property_table
from .pipeline import (ConfigError, DatasetSpec, ExperimentConfig, ReportError, RunDescriptor, canonical_method,
                       embed, execute_run, report, run_sweep)

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, default=lambda o: o.item() if hasattr(o, "item") else str(o))
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def cmd_generate(a):
    spec = GeneratorSpec(a.family, a.n, a.m, a.p, a.seed)
    g = spec.generate()
    write_edge_list(g, a.out)
    meta = {**spec.to_dict(), "N": g.num_nodes, "num_edges": g.num_edges, "fingerprint": g.fingerprint()}
    _dump(meta, str(a.out) + ".json")
    return EXIT_OK


def cmd_properties(a):
    g = load_edge_list(a.graph)
    table = property_table(g, a.seed)
    table.write(a.out, g)
    return EXIT_OK


def _hyperparams(a) -> dict:
    hp = {}
    for key, attr in (("dim", "dim"), ("window", "window"), ("negatives", "negatives"),
                      ("ns_exponent", "ns"), ("subsample_freq", "s_freq"), ("epochs", "epochs"),
                      ("learning_rate", "lr"), ("num_walks", "num_walks"), ("walk_length", "walk_length"),
                      ("p_return", "p"), ("q_inout", "q"), ("max_degree", "max_degree"), ("s1", "s1"),
                      ("s2", "s2"), ("attention_heads", "heads"), ("hidden_dim", "hidden_dim")):
        v = getattr(a, attr, None)
        if v is not None:
            hp[key] = v
    return hp


def cmd_embed(a):
    g = load_edge_list(a.graph)
    emb = embed(g, a.method, _hyperparams(a), a.seed)
    emb.write(a.out, g.labels)
    return EXIT_OK


def cmd_evaluate(a):
    g = load_edge_list(a.graph)
    tasks = a.tasks or list(TASKS)
    forest = ForestGrid(tuple(a.n_trees), tuple(a.depths))
    results = []
    if a.embeddings:
        if "link_prediction" in tasks:
            raise ConfigError("link prediction trains on an edge split; use --method instead of --embeddings")
        emb = EmbeddingMatrix.read(a.embeddings)
        labels = emb.metadata["node_ids"]
        index = {str(g.label_of(u)): u for u in range(g.num_nodes)}
        order = np.array([index[i] for i in labels])
        vectors = np.empty_like(emb.vectors)
        vectors[order] = emb.vectors
        table = property_table(g, 0)
        for task in tasks:
            try:
                r = property_task(vectors, table, task, forest, SplitSpec("node", 0.9, a.seed))
                results.append({"task": r.task, "metric": r.metric, "value": r.value, "best": r.details["best"]})
            except TaskSkipped as exc:
                results.append({"task": task, "skipped": str(exc)})
    else:
        if not a.method:
            raise ConfigError("give --method or --embeddings")
        method = canonical_method(a.method)
        ds = DatasetSpec(Path(a.graph).stem, path=a.graph)
        run = RunDescriptor(ds.name, ds.describe(), method, _hyperparams(a), a.seed, tuple(tasks))
        res = execute_run(run, ds, forest)
        results = [{k: r[k] for k in ("task", "metric", "value", "wallclock_s")} for r in res["rows"]]
    _dump({"graph": a.graph, "results": results}, a.out)
    return EXIT_OK


def cmd_sweep(a):
    config = ExperimentConfig.load(a.config)
    if a.pre_search and config.pre_search is None:
        from .pipeline import PRESEARCH_GRID
        config.pre_search = {k: list(v) for k, v in PRESEARCH_GRID.items()}
    if a.output_dir:
        config.output_dir = a.output_dir
    print(f"sweep: {config.sweep_size} runs planned", file=sys.stderr)
    summary = run_sweep(config, max_runs=a.max_runs)
    _dump(summary.as_dict())
    return EXIT_PARTIAL if summary.failed else EXIT_OK


def cmd_report(a):
    summary = report(a.results, a.out)
    _dump({"counts": summary["counts"], "figures": summary["figures"]})
    return EXIT_OK


def cmd_verify(a):
    g = load_edge_list(a.graph)
    rep = verify_lemmas(g, a.t_max, a.t_converge, a.seed)
    _dump(rep, a.report)
    return EXIT_OK if rep["passed"] else EXIT_PARTIAL


def _features(g, spec: str, seed: int):
    if spec == "degrees":
        return ms.degree_onehot(g)
    if spec == "constant":
        return np.ones((g.num_nodes, 1))
    if spec == "random":
        return np.random.default_rng(seed).random((g.num_nodes, 16))
    path = Path(spec)
    if path.suffix == ".npy" and path.exists():
        return np.load(path)
    raise ConfigError(f"unknown feature source {spec!r} (degrees, constant, random or a .npy file)")


def cmd_multiset(a):
    g = load_edge_list(a.graph)
    X = _features(g, a.features, a.seed)
    rates = {how: ms.neighborhood_collision_rate(g, X, how) for how in ms.AGGREGATORS}
    _dump({"graph": a.graph, "features": a.features, "tolerance": ms.TOL, "collision_rate": rates}, a.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="grl-probe", description="Graph representation learning probes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("generate", help="write a seeded synthetic graph")
    s.add_argument("--family", required=True, type=str.upper, choices=("BA", "ER", "HK"))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("properties", help="per-node property table")
    s.add_argument("--graph", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_properties)

    def hyper(s):
        s.add_argument("--method", type=canonical_method)
        s.add_argument("--seed", type=int, default=0)
        for name, typ in (("dim", int), ("window", int), ("negatives", int), ("ns", float), ("s-freq", float),
                          ("epochs", int), ("lr", float), ("num-walks", int), ("walk-length", int),
                          ("p", float), ("q", float), ("max-degree", int), ("s1", int), ("s2", int),
                          ("heads", int), ("hidden-dim", int)):
            s.add_argument(f"--{name}", type=typ)

    s = sub.add_parser("embed", help="train one embedding model")
    s.add_argument("--graph", required=True)
    s.add_argument("--out", required=True)
    hyper(s)
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("evaluate", help="score embeddings on the downstream tasks")
    s.add_argument("--graph", required=True)
    s.add_argument("--embeddings")
    s.add_argument("--tasks", nargs="+", choices=TASKS)
    s.add_argument("--n-trees", type=int, nargs="+", default=[100, 300, 500])
    s.add_argument("--depths", type=int, nargs="+", default=[8, 10, 12])
    s.add_argument("--out")
    hyper(s)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", help="run (or resume) a configured sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--pre-search", action="store_true")
    s.add_argument("--max-runs", type=int)
    s.add_argument("--output-dir")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("report", help="tables and SVG charts from a results CSV")
    s.add_argument("--results", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("verify-lemmas", help="certify the walk and aggregator lemmas on a graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--t-max", type=int, default=20)
    s.add_argument("--t-converge", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--report")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("multiset-report", help="aggregator collision rates on a graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--features", default="degrees")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_multiset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return a.func(a)
    except (ConfigError, ReportError, GraphError, ValueError, OSError) as exc:
        print(f"grl-probe: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
