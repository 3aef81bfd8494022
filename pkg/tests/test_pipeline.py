import csv
import html
import json
import re

import numpy as np
import pytest

from grl_probe.evaluation import ForestGrid
from grl_probe.generators import GeneratorSpec
from grl_probe.pipeline import (DEFAULT_GRIDS, RESULT_COLUMNS, ConfigError, DatasetSpec, ExperimentConfig, MethodSpec,
                                ReportError, RunDescriptor, canonical_method, default_config_dict, enumerate_sweep,
                                read_results, report, run_sweep, worker_count)

TINY_FOREST = ForestGrid(n_trees=(5,), depths=(3,))


def tiny_config(tmp_path, methods=None, **kw):
    base = dict(
        datasets=[DatasetSpec("ba", GeneratorSpec("BA", 60, m=2, seed=0)),
                  DatasetSpec("er", GeneratorSpec("ER", 60, p=0.1, seed=1))],
        methods=methods or [MethodSpec("DeepWalk", {"dim": [4, 8]}, {"window": 3})],
        tasks=("link_prediction", "degree"),
        walk={"num_walks": 2, "walk_length": 10, "epochs": 1},
        forest=TINY_FOREST, output_dir=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig(**base)


def svg_data(path):
    text = open(path).read()
    m = re.search(r"<dc:description>(.*?)</dc:description>", text, re.S)
    return json.loads(html.unescape(m.group(1)))


# ---------------------------------------------------------------- enumeration

def _default_sweep(method):
    cfg = ExperimentConfig([DatasetSpec("d", GeneratorSpec("BA", 100, m=2))], [MethodSpec(method, DEFAULT_GRIDS[method])])
    return cfg, enumerate_sweep(cfg)


def test_default_grid_sizes():
    for method, size in (("DeepWalk", 36), ("Node2Vec", 24)):
        cfg, runs = _default_sweep(method)
        assert len(runs) == cfg.sweep_size == size
        assert len({r.run_id for r in runs}) == size
    cfg = ExperimentConfig([DatasetSpec("d", GeneratorSpec("BA", 100, m=2))], [MethodSpec("GCN", {"dim": [16]})])
    assert len(enumerate_sweep(cfg)) == 1


def test_deepwalk_grid_values():
    _, runs = _default_sweep("DeepWalk")
    vals = {k: sorted({r.hyperparams[k] for r in runs}) for k in ("ns_exponent", "subsample_freq", "dim")}
    assert len(vals["ns_exponent"]) == 3 and len(vals["subsample_freq"]) == 3 and len(vals["dim"]) == 4
    _, runs = _default_sweep("Node2Vec")
    assert sorted({r.hyperparams["q_inout"] for r in runs}) == [0.5, 1, 2]
    assert sorted({r.hyperparams["p_return"] for r in runs}) == [1, 2]


def test_enumeration_is_deterministic():
    a = [r.run_id for r in _default_sweep("Node2Vec")[1]]
    b = [r.run_id for r in _default_sweep("Node2Vec")[1]]
    assert a == b


def test_run_ids_do_not_collide():
    rng = np.random.default_rng(0)
    ids = set()
    seen = set()
    while len(seen) < 10_000:
        hp = {"dim": int(rng.choice([8, 16, 32, 64, 128])), "window": int(rng.integers(1, 20)),
              "ns_exponent": float(rng.choice([-1, 0, 0.5, 0.75, 1])), "seedless": int(rng.integers(0, 50))}
        d = RunDescriptor(f"ds{rng.integers(0, 5)}", {"n": int(rng.integers(10, 20))}, "DeepWalk", hp,
                          int(rng.integers(0, 3)), ("degree",))
        key = json.dumps([d.dataset, d.dataset_params, d.hyperparams, d.seed], sort_keys=True)
        if key in seen:
            continue
        seen.add(key)
        ids.add(d.run_id)
    assert len(ids) == 10_000


def test_run_id_is_pure():
    a = RunDescriptor("x", {"n": 3}, "GCN", {"dim": 8, "epochs": 5}, 0, ("degree",))
    b = RunDescriptor("x", {"n": 3}, "GCN", {"epochs": 5, "dim": 8}, 0, ("community",))
    assert a.run_id == b.run_id
    assert a.run_id != RunDescriptor("x", {"n": 3}, "GCN", {"dim": 8, "epochs": 5}, 1, ()).run_id


# ---------------------------------------------------------------- config validation

def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        MethodSpec("DeepWalk", {"dim": []})
    with pytest.raises(ConfigError):
        MethodSpec("DeepWalk", {"heads": [1]})
    with pytest.raises(ConfigError):
        MethodSpec("DeepWalk", {"dim": [0]})
    with pytest.raises(ConfigError):
        MethodSpec("Node2Vec", {"p_return": [-1]})
    with pytest.raises(ConfigError):
        canonical_method("word2vec")
    with pytest.raises(ConfigError):
        tiny_config(tmp_path, tasks=("pagerank",))
    with pytest.raises(ConfigError):
        tiny_config(tmp_path, seeds=())
    raw = default_config_dict()
    raw["schema_version"] = 2
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)
    raw = default_config_dict()
    raw["colour"] = "blue"
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


def test_yaml_config_roundtrip(tmp_path):
    import yaml
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump(default_config_dict("res")))
    cfg = ExperimentConfig.load(path)
    assert cfg.sweep_size == 36 + 24 + 12 + 108 + 108 + 12
    assert cfg.output_dir == str(tmp_path / "res")
    (tmp_path / "bad.yaml").write_text("schema_version: [1\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "bad.yaml")


# ---------------------------------------------------------------- sweeps

def test_sweep_resume_and_idempotence(tmp_path):
    cfg = tiny_config(tmp_path)
    first = run_sweep(cfg, max_runs=2)
    assert first.planned == 4 and first.executed == 2 and first.failed == 0
    rows = read_results(first.results_path)
    assert len(rows) == 4
    second = run_sweep(cfg)
    assert second.executed == 2 and second.skipped == 2
    third = run_sweep(cfg)
    assert third.executed == 0 and third.skipped == 4
    rows = read_results(first.results_path)
    assert len(rows) == 8
    with open(first.results_path, newline="") as fh:
        assert tuple(csv.DictReader(fh).fieldnames) == RESULT_COLUMNS
    assert all(float(r["wallclock_s"]) > 0 for r in rows)
    assert {r["task"] for r in rows} == {"link_prediction", "degree"}
    assert {r["metric"] for r in rows} == {"AUC", "R2"}


def test_sweep_failures_are_recorded(tmp_path):
    cfg = tiny_config(tmp_path, datasets=[DatasetSpec("missing", path=str(tmp_path / "nope.edges")),
                                          DatasetSpec("ba", GeneratorSpec("BA", 60, m=2, seed=0))],
                      methods=[MethodSpec("DeepWalk", {"dim": [4]})])
    s = run_sweep(cfg)
    assert s.failed == 1 and s.executed == 2
    lines = (tmp_path / "out" / "failures.jsonl").read_text().splitlines()
    assert len(lines) == 1 and "error" in json.loads(lines[0])
    assert len(read_results(s.results_path)) == 2


def test_worker_pool_matches_serial(tmp_path, monkeypatch):
    monkeypatch.setenv("GRL_PROBE_THREADS", "2")
    assert worker_count() == 2
    par = run_sweep(tiny_config(tmp_path / "p"))
    monkeypatch.setenv("GRL_PROBE_THREADS", "1")
    ser = run_sweep(tiny_config(tmp_path / "s"))
    assert par.executed == ser.executed == 4
    key = lambda r: (r["dataset"], r["hyperparam_json"], r["task"])  # noqa: E731
    a = {key(r): r["value"] for r in read_results(par.results_path)}
    b = {key(r): r["value"] for r in read_results(ser.results_path)}
    assert a == b


def test_single_gnn_run(tmp_path):
    cfg = tiny_config(tmp_path, methods=[MethodSpec("SAGE_MEAN", {"dim": [8]}, {"hidden_dim": 8})],
                      datasets=[DatasetSpec("ba", GeneratorSpec("BA", 60, m=2, seed=0))], gnn_epochs=1,
                      tasks=("community",))
    s = run_sweep(cfg)
    rows = read_results(s.results_path)
    assert s.executed == 1 and len(rows) == 1 and rows[0]["metric"] == "MicroF1"
    assert json.loads(rows[0]["hyperparam_json"])["epochs"] == 1


def test_pre_search_freezes_walk_settings(tmp_path):
    cfg = tiny_config(tmp_path, datasets=[DatasetSpec("ba", GeneratorSpec("BA", 60, m=2, seed=0))],
                      methods=[MethodSpec("DeepWalk", {"dim": [4]})],
                      pre_search={"num_walks": [1, 2], "walk_length": [5]})
    s = run_sweep(cfg)
    frozen = json.loads((tmp_path / "out" / "presearch.json").read_text())
    assert set(frozen) == {"ba|DeepWalk"} and frozen["ba|DeepWalk"]["walk_length"] == 5
    hp = json.loads(read_results(s.results_path)[0]["hyperparam_json"])
    assert hp["num_walks"] == frozen["ba|DeepWalk"]["num_walks"]


# ---------------------------------------------------------------- report

def _write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS)
        w.writeheader()
        w.writerows(rows)


def _row(dataset="ba", method="DeepWalk", task="degree", value=0.5, hp=None, params=None):
    return {"dataset": dataset, "generator_params": json.dumps(params or {"family": "BA", "stats": {}}),
            "method": method, "hyperparam_json": json.dumps(hp or {"dim": 8}), "task": task, "metric": "R2",
            "value": value, "seed": 0, "wallclock_s": 0.1}


def test_report_single_row(tmp_path):
    _write_rows(tmp_path / "r.csv", [_row()])
    s = report(tmp_path / "r.csv")
    assert len(s["best"]) == 1
    data = svg_data(tmp_path / "report" / "best_degree.svg")
    assert len(data) == 1 and data[0]["value"] == 0.5


def test_report_best_is_max_over_grid(tmp_path):
    rows = [_row(value=v, hp={"dim": d}) for v, d in ((0.2, 8), (0.7, 16), (0.4, 32))]
    rows.append(_row(method="GCN", value=0.3))
    _write_rows(tmp_path / "r.csv", rows)
    s = report(tmp_path / "r.csv", tmp_path / "rep")
    best = {(b["method"], b["task"]): b for b in s["best"]}
    assert best[("DeepWalk", "degree")]["value"] == 0.7
    assert json.loads(best[("DeepWalk", "degree")]["hyperparam_json"]) == {"dim": 16}
    line = svg_data(tmp_path / "rep" / "hyper_DeepWalk_dim_degree.svg")
    assert [p["x"] for p in line["BA"]] == [8, 16, 32]
    # the report reads only the CSV
    again = report(tmp_path / "r.csv", tmp_path / "rep2")
    assert again["best"] == s["best"]


def test_report_graph_statistic_lines(tmp_path):
    rows = [_row(dataset=f"d{i}", value=0.1 * i, params={"family": "HK", "stats": {"transitivity": t, "density": 0.1,
                                                                                      "avg_clustering": 0.2}})
            for i, t in enumerate((0.3, 0.1, 0.2))]
    _write_rows(tmp_path / "r.csv", rows)
    report(tmp_path / "r.csv")
    data = svg_data(tmp_path / "report" / "stat_transitivity_degree.svg")
    assert [p["x"] for p in data["DeepWalk"]] == [0.1, 0.2, 0.3]


def test_report_errors(tmp_path):
    (tmp_path / "bad.csv").write_text("dataset,value\nx,1\n")
    with pytest.raises(ReportError):
        report(tmp_path / "bad.csv")
    _write_rows(tmp_path / "empty.csv", [])
    with pytest.raises(ReportError):
        report(tmp_path / "empty.csv")


def test_report_from_real_sweep(tmp_path):
    s = run_sweep(tiny_config(tmp_path))
    summary = report(s.results_path)
    assert summary["counts"]["runs"] == 4
    assert summary["counts"]["embedding_models"] == 8
    assert summary["counts"]["forest_fits"] == 4
