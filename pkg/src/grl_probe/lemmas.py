"""Numerical certification of the random-walk and aggregator lemmas on one graph."""

from __future__ import annotations

import numpy as np

from . import multiset as ms
from .graph import Graph
from .walks import PreconditionError, spectral_summary, verify_convergence, verify_degree_balance

BALANCE_TOL = 1e-9
CONVERGENCE_TOL = 1e-6
SPECTRAL_TOL = 1e-9


def verify_lemmas(g: Graph, t_max: int = 20, t_converge: int = 500, seed: int = 0) -> dict:
    """Per-lemma pass/fail entries; unmet preconditions are reported, not raised."""
    out = {"graph": {"fingerprint": g.fingerprint(), "num_nodes": g.num_nodes, "num_edges": g.num_edges},
           "lemmas": {}, "deviations": []}
    lem = out["lemmas"]

    dev = verify_degree_balance(g, t_max)
    lem["degree_balance"] = {"t_max": t_max, "max_deviation": dev, "tolerance": BALANCE_TOL,
                             "passed": bool(dev < BALANCE_TOL)}

    try:
        gap = verify_convergence(g, t_converge)
        lem["stationary_convergence"] = {"t": t_converge, "max_l1_gap": gap, "tolerance": CONVERGENCE_TOL,
                                         "passed": bool(gap < CONVERGENCE_TOL)}
    except PreconditionError as exc:
        lem["stationary_convergence"] = {"t": t_converge, "passed": None, "precondition": str(exc)}
        out["deviations"].append(
            "convergence to the stationary distribution requires a connected non-bipartite graph")

    try:
        s = spectral_summary(g)
        ev = s.eigenvalues
        lem["spectral"] = {"lambda_1": float(ev[0]), "lambda_min": float(ev[-1]),
                           "max_abs": float(np.abs(ev).max()), "tolerance": SPECTRAL_TOL,
                           "passed": bool(abs(ev[0] - 1) <= SPECTRAL_TOL
                                          and np.abs(ev).max() <= 1 + SPECTRAL_TOL)}
    except (PreconditionError, ValueError) as exc:
        lem["spectral"] = {"passed": None, "precondition": str(exc)}

    wit = ms.witness_report(seed)
    exh = ms.exhaustive_check()
    for how in ("mean", "max"):
        w = wit[how]
        lem[f"{how}_aggregator"] = {
            "witnesses": w["witnesses"], "collide": w["collide"], "sum_separates": w["sum_separates"],
            "exhaustive_mismatches": exh[how]["mismatches"],
            "passed": bool(w["collide"] == w["witnesses"] == w["sum_separates"]
                           and exh[how]["mismatches"] == 0),
        }
    out["deviations"].append("aggregator lemmas use the identity as the element-wise map")
    out["passed"] = all(v["passed"] is not False for v in lem.values())
    return out
