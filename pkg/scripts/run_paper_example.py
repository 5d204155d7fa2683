#!/usr/bin/env python3
"""Run every check on the hybrid-space example and on the closed-at-1 variant.

Prints the pair conditions, the sampled and searched contraction margins,
and the Picard trace from x0 = 4.  Pass --trace PATH to also write the
trace as CSV.
"""
import argparse

from shiftpair.conditions import check_altering, check_condition_i, check_condition_ii, condition_ii_gap
from shiftpair.corpus import instance
from shiftpair.seeding import stream
from shiftpair.solver import picard, write_trace_csv
from shiftpair.verifier import check_contraction, search_counterexample


def report(name: str, seed: int, budget: int) -> None:
    inst = instance(name)
    print(f"== {name}: {inst.map.description}")
    ci = check_condition_i(inst.pair, seed=stream(seed, "condition_i"))
    cii = check_condition_ii(inst.pair)
    print(f"condition (i)  {ci.verdict:<12} violations {ci.failures} / {ci.samples_used}")
    print(f"condition (ii) {cii.verdict:<12} min gap {cii.margin:.6f} (gap at 1: {condition_ii_gap(inst.pair, 1.0)[0]:.6f})")
    print(f"psi altering?  {check_altering(inst.pair.psi).verdict} (failed clauses "
          f"{', '.join(check_altering(inst.pair.psi).failed_clauses)})")
    sampled = check_contraction(inst.space, inst.map, inst.pair, seed=seed)
    searched = search_counterexample(inst.space, inst.map, inst.pair, seed=seed, budget=budget)
    for label, r in (("sampled", sampled), ("search", searched)):
        w = r.witness
        print(f"{label:<8} {r.verdict:<9} worst margin {r.worst_margin:+.6g} at x={w['x']:.9g} y={w['y']:.9g}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=20_000)
    ap.add_argument("--trace", metavar="PATH")
    args = ap.parse_args()

    for name in ("paper-example", "paper-example-case1"):
        report(name, args.seed, args.budget)

    inst = instance("paper-example")
    trace = picard(inst.space, inst.map, inst.x0)
    print(f"== Picard from x0 = {inst.x0}: {trace.verdict} after {trace.iterations} iterations")
    for n, (x, u) in enumerate(zip(trace.iterates, trace.step_distances)):
        print(f"{n:3d}  x={x:<24.17g} u={u:.6g}")
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            write_trace_csv(trace, fh)


if __name__ == "__main__":
    main()
