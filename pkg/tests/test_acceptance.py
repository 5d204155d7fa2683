"""Acceptance criteria 1-7, one test each.

Each test appends a single PASS/FAIL line that the conftest hook prints in
the terminal summary.
"""
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from shiftpair.cli import main
from shiftpair.conditions import (
    INCONCLUSIVE,
    PASS,
    VIOLATED,
    ShiftingPair,
    check_altering,
    check_condition_i,
    check_condition_ii,
    condition_ii_gap,
    default_grid,
    from_altering_pair,
    from_banach,
)
from shiftpair.corpus import instance, list_instances, paper_map_case1, run_instance
from shiftpair.metric import check_metric_axioms, interval_space
from shiftpair.scalar_fn import scalar_fn
from shiftpair.solver import banach_bound, picard
from shiftpair.verifier import check_contraction, search_counterexample

from conftest import ACCEPTANCE_LINES, affine_map
from test_metric import squared_space


def record(n, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def test_criterion_1_paper_example(capsys):
    inst = instance("paper-example")
    code = main(["corpus", "run", "paper-example"])
    capsys.readouterr()
    result = run_instance(inst)
    gap = condition_ii_gap(inst.pair, 1.0)[0]
    grid = default_grid(inst.pair)
    checks = {
        "exit 0": code == 0,
        "closure": result["closure"]["ok"] and result["closure"]["checked"] >= 10_000,
        "cond (i)": result["condition_i"]["failures"] == 0 and result["condition_i"]["samples_used"] >= 100_000,
        "cond (ii)": result["condition_ii"]["verdict"] == PASS
        and all(w in grid for w in (1 - 1e-6, 1.0, 1 + 1e-6)),
        "gap": abs(gap - (math.log(5 / 12) - math.log(4 / 12))) <= 1e-9,
        "contraction": result["contraction"]["worst_margin"] > 0 and result["contraction"]["samples_used"] >= 99_000,
        "picard": result["solve"]["residual"] < 1e-12 and result["solve"]["iterations"] <= 20
        and result["solve"]["x0"] == 4,
        "uniqueness": len(result["uniqueness"]["limits"]) == 10
        and all(abs(z) <= 1e-9 for z in result["uniqueness"]["limits"]),
    }
    failed = [k for k, v in checks.items() if not v]
    detail = (f"gap(1)={gap:.12f} worst margin={result['contraction']['worst_margin']:.3g} "
              f"iterations={result['solve']['iterations']}")
    assert record(1, not failed, detail + (f" failed: {failed}" if failed else "")), failed


def test_criterion_2_altering_conditions_fail():
    psi = instance("paper-example").pair.psi
    r = check_altering(psi)
    a = next(w for w in r.witnesses if w["clause"] == "a")
    d = next(w for w in r.witnesses if w["clause"] == "d" and w["t"] == 1.0)
    ok = (r.verdict == VIOLATED
          and abs(a["value"] - math.log(1 / 12)) <= 1e-12
          and sorted(d["value"]) == pytest.approx([math.log(5 / 12), math.log(6 / 12)], abs=1e-12)
          and run_instance(instance("paper-example"))["all_met"])
    assert record(2, ok, f"clauses {r.failed_clauses}; psi(0)={a['value']:.12f}; limits at 1: {d['value']}")


def test_criterion_3_reduction_coherence():
    a = from_altering_pair(scalar_fn("t"), scalar_fn("t/2"))
    b = from_banach(0.5)
    grid = np.linspace(0, 101, 10_000)
    diff = max(np.max(np.abs(a.phi(grid) - b.phi(grid))), np.max(np.abs(a.psi(grid) - b.psi(grid))))
    unit, T = interval_space(0, 1), affine_map("x/2")
    same = all(check_contraction(unit, T, a, seed=s, n=5000).verdict
               == check_contraction(unit, T, b, seed=s, n=5000).verdict for s in range(10))
    assert record(3, diff <= 1e-12 and same, f"max |difference| = {diff:.3g}; verdicts equal over 10 seeds: {same}")


def test_criterion_4_banach_family():
    space = interval_space(0, 2)
    worst_slack = math.inf
    ok = True
    for j in range(1, 10):
        k = j / 10
        p = from_banach(k)
        ok &= check_condition_i(p, seed=j, n=100_000).verdict == PASS
        ok &= check_condition_ii(p).verdict == PASS
        T = affine_map(f"{k!r}*x + {1 - k!r}", 0, 2)
        for x0 in (0.0, 0.3, 2.0):
            trace = picard(space, T, x0)
            u0 = trace.step_distances[0]
            for n, x in enumerate(trace.iterates):
                slack = banach_bound(k, n, u0) + 1e-12 - abs(x - 1.0)
                worst_slack = min(worst_slack, slack)
    ok &= worst_slack >= 0
    assert record(4, ok, f"k=0.1..0.9, min bound slack {worst_slack:.3g}")


def test_criterion_5_sound_negatives():
    neg = instance("negative-identity")
    s = search_counterexample(neg.space, neg.map, neg.pair, seed=0, budget=1000)
    tt = ShiftingPair(scalar_fn("t"), scalar_fn("t"))
    grid = default_grid(tt)
    c2 = check_condition_ii(tt, grid)
    ax = check_metric_axioms(squared_space(), seed=0)
    ok = (s.verdict == VIOLATED and s.samples_used <= 1000 and s.witness is not None
          and c2.verdict == INCONCLUSIVE and c2.failures == grid.size
          and not ax.ok and ax.triangle.witness == (0.0, 1.0, 2.0))
    detail = (f"identity witness margin {s.witness['margin']:.3g} in {s.samples_used} evals; "
              f"(t,t) inconclusive at {c2.failures}/{grid.size}; triangle witness {ax.triangle.witness}")
    assert record(5, ok, detail)


COMMANDS = [
    ["check-pair", "--instance", "paper-example"],
    ["check-contraction", "--instance", "paper-example"],
    ["check-contraction", "--instance", "paper-example-case1"],
    ["solve", "--instance", "paper-example"],
    ["probe-uniqueness", "--instance", "paper-example"],
    ["corpus", "list"],
    ["corpus", "run", "paper-example"],
    ["corpus", "export", "banach-k", "--param", "k=0.3"],
]


def test_criterion_6_determinism():
    mismatched = []
    for argv in COMMANDS:
        full = [sys.executable, "-m", "shiftpair", *argv, "--json", "--seed", "7"]
        first = subprocess.run(full, capture_output=True, check=False)
        second = subprocess.run(full, capture_output=True, check=False)
        json.loads(first.stdout)
        if first.stdout != second.stdout or first.returncode != second.returncode:
            mismatched.append(" ".join(argv))
    assert record(6, not mismatched, f"{len(COMMANDS)} commands run twice; differing: {mismatched or 'none'}")


# -- independent recomputation ------------------------------------------------


def _eval_pieces(pieces, value, var):
    """Evaluate exported pieces with Python's own arithmetic, not the package's."""
    for p in pieces:
        iv = p["interval"]
        lo, hi = float(iv["lo"]), float(iv["hi"]) if iv["hi"] != "+inf" else math.inf
        above = value > lo or (iv.get("lo_closed", True) and value == lo)
        below = value < hi or (iv.get("hi_closed", False) and value == hi)
        if above and below:
            return float(eval(p["expr"], {"__builtins__": {}}, {"ln": math.log, "abs": abs, var: value}))
    raise AssertionError(f"{value} not covered")


def _distance(space_cfg, x, y):
    if x == y:
        return 0.0
    if space_cfg["kind"] == "hybrid" and (x > 1 or y > 1):
        return x + y
    return abs(x - y)


def _recompute_contraction(cfg, w):
    tx = _eval_pieces(cfg["map"]["pieces"], w["x"], "x")
    ty = _eval_pieces(cfg["map"]["pieces"], w["y"], "x")
    d_xy, d_t = _distance(cfg["space"], w["x"], w["y"]), _distance(cfg["space"], tx, ty)
    psi, phi = _eval_pieces(cfg["pair"]["psi"], d_t, "t"), _eval_pieces(cfg["pair"]["phi"], d_xy, "t")
    return {"tx": tx, "ty": ty, "d_xy": d_xy, "d_txty": d_t, "psi": psi, "phi": phi, "margin": phi - psi}


def _recompute_condition_i(cfg, w):
    return {"psi_u": _eval_pieces(cfg["pair"]["psi"], w["u"], "t"),
            "phi_v": _eval_pieces(cfg["pair"]["phi"], w["v"], "t")}


def _collect_witnesses():
    out = []
    for name in list_instances():
        inst = instance(name)
        cfg = inst.to_config()
        for seed in range(12):
            r = check_contraction(inst.space, inst.map, inst.pair, seed=seed, n=2000)
            s = search_counterexample(inst.space, inst.map, inst.pair, seed=seed, budget=1000)
            out += [("contraction", cfg, r.witness), ("contraction", cfg, s.witness)]
    doubled = instance("ln-pair-banach-half")
    doubled.pair = ShiftingPair(scalar_fn("t"), scalar_fn("2*t"))
    cfg = doubled.to_config()
    for seed in range(10):
        for w in check_condition_i(doubled.pair, seed=seed, n=2000).witnesses:
            out.append(("condition_i", cfg, w))
    case1 = instance("paper-example")
    case1.map = paper_map_case1()
    cfg = case1.to_config()
    for seed in range(5):
        out.append(("contraction", cfg, search_counterexample(case1.space, case1.map, case1.pair,
                                                                seed=seed, budget=1000).witness))
    return out


def test_criterion_7_witness_recomputation():
    pool = _collect_witnesses()
    rng = np.random.default_rng(2024)
    chosen = rng.choice(len(pool), size=100, replace=False)
    worst, kinds = 0.0, set()
    for idx in chosen:
        kind, cfg, w = pool[idx]
        kinds.add(kind)
        fresh = _recompute_contraction(cfg, w) if kind == "contraction" else _recompute_condition_i(cfg, w)
        for key, value in fresh.items():
            worst = max(worst, abs(value - w[key]))
    ok = worst <= 1e-12 and len(chosen) == 100
    assert record(7, ok, f"100 of {len(pool)} witnesses ({', '.join(sorted(kinds))}); max deviation {worst:.3g}")
