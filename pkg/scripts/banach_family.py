#!/usr/bin/env python3
"""Banach contractions kx + (1-k)c as shifting pairs (t, kt).

For each k the script checks both pair conditions, the sampled contraction
margin, and how far the Picard error stays below the a-priori bound.  The
bound is attained by an affine map, so the slack is zero up to rounding.
"""
import argparse

import numpy as np

from shiftpair.conditions import check_condition_i, check_condition_ii
from shiftpair.corpus import instance
from shiftpair.seeding import stream
from shiftpair.solver import banach_bound, picard
from shiftpair.verifier import check_contraction


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=float, default=1.0)
    ap.add_argument("--x0", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'k':>4} {'(i)':>5} {'(ii)':>5} {'contraction':>12} {'iters':>6} {'min slack':>11}")
    for k in np.round(np.arange(0.1, 1.0, 0.1), 1):
        inst = instance("banach-k", k=float(k), c=args.c)
        ci = check_condition_i(inst.pair, seed=stream(args.seed, "condition_i"), n=20_000)
        cii = check_condition_ii(inst.pair)
        con = check_contraction(inst.space, inst.map, inst.pair, seed=args.seed, n=20_000)
        trace = picard(inst.space, inst.map, args.x0)
        u0 = trace.step_distances[0] if trace.step_distances else 0.0
        slack = min(banach_bound(k, n, u0) - abs(x - args.c) for n, x in enumerate(trace.iterates))
        print(f"{k:>4} {ci.verdict:>5} {cii.verdict:>5} {con.verdict:>12} {trace.iterations:>6} {slack:>11.3g}")


if __name__ == "__main__":
    main()
