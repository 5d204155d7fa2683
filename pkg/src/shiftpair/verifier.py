"""Sampling checks of ``psi(d(Tx,Ty)) <= phi(d(x,y))``.

The margin of a pair is ``phi(d(x,y)) - psi(d(Tx,Ty))``; the hypothesis
holds on a sample iff every margin is nonnegative.  The diagonal ``x = y``
reduces to ``psi(0) <= phi(0)`` and is evaluated once, separately.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .conditions import BREAKPOINT_OFFSET, PASS, VIOLATED, ShiftingPair
from .metric import ClosureError, MetricSpace, SelfMap, images, verify_closure
from .seeding import stream

DEFAULT_TOL = 1e-9

__all__ = ["ContractionReport", "check_contraction", "search_counterexample", "evaluate_pairs", "witness_at"]


@dataclass
class ContractionReport:
    verdict: str
    worst_margin: float
    diagonal_margin: float
    witness: dict | None
    samples_used: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "worst_margin": self.worst_margin,
            "diagonal_margin": self.diagonal_margin,
            "witness": self.witness,
            "samples_used": self.samples_used,
            "tol": self.tol,
        }


def evaluate_pairs(space: MetricSpace, map: SelfMap, pair: ShiftingPair, xs, ys) -> dict[str, np.ndarray]:
    """All quantities entering the margin, for off-diagonal pairs only."""
    xs = np.asarray(space.canonical(np.asarray(xs, float)), float)
    ys = np.asarray(space.canonical(np.asarray(ys, float)), float)
    keep = xs != ys
    xs, ys = xs[keep], ys[keep]
    tx, ty = images(map, space, xs), images(map, space, ys)
    d_xy = np.asarray(space.distance(xs, ys), float)
    d_t = np.asarray(space.distance(tx, ty), float)
    psi = np.asarray(pair.psi(d_t), float)
    phi = np.asarray(pair.phi(d_xy), float)
    return {"x": xs, "y": ys, "tx": tx, "ty": ty, "d_xy": d_xy, "d_txty": d_t,
            "psi": psi, "phi": phi, "margin": phi - psi}


def witness_at(values: dict[str, np.ndarray], k: int, stratum: str) -> dict:
    w = {name: float(arr[k]) for name, arr in values.items()}
    w["stratum"] = stratum
    return w


def _diagonal_margin(space: MetricSpace, pair: ShiftingPair) -> float:
    return float(pair.phi(0.0)) - float(pair.psi(0.0))


def _finish(best: dict | None, diag: float, used: int, tol: float) -> ContractionReport:
    worst = best["margin"] if best is not None else float("inf")
    ok = worst >= -tol and diag >= -tol
    return ContractionReport(PASS if ok else VIOLATED, worst, diag, best, used, tol)


def _require_closure(space, map, seed, n):
    report = verify_closure(space, map, seed=stream(seed, "closure"), n=n)
    if not report.ok:
        x, tx = report.witnesses[0]
        raise ClosureError(f"T({x!r}) = {tx!r} is not in {space.description}")


def check_contraction(space: MetricSpace, map: SelfMap, pair: ShiftingPair, seed=0, n: int = 100_000,
                      tol: float = DEFAULT_TOL, closure_n: int = 10_000) -> ContractionReport:
    """Margin over ``n`` sampled pairs, split across the space's strata.

    The hybrid space splits the budget evenly between both-fractional,
    mixed, both-integer and unrestricted pairs.  Diagonal pairs drawn by
    chance are dropped, so ``samples_used`` can fall slightly below ``n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _require_closure(space, map, seed, closure_n)
    diag = _diagonal_margin(space, pair)
    rng = stream(seed, "contraction")
    best, used = None, 0
    for name, xs, ys in space.strata(rng, n):
        vals = evaluate_pairs(space, map, pair, xs, ys)
        used += vals["margin"].size
        if vals["margin"].size:
            k = int(np.argmin(vals["margin"]))
            if best is None or vals["margin"][k] < best["margin"]:
                best = witness_at(vals, k, name)
    return _finish(best, diag, used, tol)


def _forced_probes(space: MetricSpace, pair: ShiftingPair) -> tuple[np.ndarray, np.ndarray]:
    marks = [float(m) for m in space.landmarks]
    xs, ys = [], []
    for x, y in itertools.permutations(marks, 2):
        xs.append(x)
        ys.append(y)
    deltas = {BREAKPOINT_OFFSET}
    for b in pair.breakpoints:
        deltas.update((b, b - BREAKPOINT_OFFSET, b + BREAKPOINT_OFFSET))
    for x in marks:
        for delta in sorted(d for d in deltas if d > 0):
            for y in (x - delta, x + delta):
                if space.contains(y):
                    xs.append(x)
                    ys.append(y)
    return np.asarray(xs, float), np.asarray(ys, float)


def search_counterexample(space: MetricSpace, map: SelfMap, pair: ShiftingPair, seed=0,
                          budget: int = 100_000, tol: float = DEFAULT_TOL, batch: int = 256,
                          steps: int = 6, local: int = 64, closure_n: int = 10_000) -> ContractionReport:
    """Minimize the margin with forced probes, random restarts and local descent.

    Forced probes cover all landmark pairs and pairs at breakpoint-adjacent
    distances.  Each round then draws a random batch over the strata and runs
    a short descent (shrinking Gaussian steps for fractional points, +-1 for
    integers) from the batch minimum on even rounds and from the global
    minimum on odd rounds.  The candidate sequence does not depend on
    ``budget``, which only truncates it; a larger budget therefore never
    reports a larger worst margin.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    _require_closure(space, map, seed, closure_n)
    diag = _diagonal_margin(space, pair)
    rng = stream(seed, "search")
    best: dict | None = None
    used = 0

    def consume(tag, xs, ys):
        nonlocal best, used
        vals = evaluate_pairs(space, map, pair, xs, ys)
        take = min(vals["margin"].size, budget - used)
        if take <= 0:
            return None
        vals = {k: v[:take] for k, v in vals.items()}
        used += take
        k = int(np.argmin(vals["margin"]))
        local_best = witness_at(vals, k, tag)
        if best is None or local_best["margin"] < best["margin"]:
            best = local_best
        return local_best

    px, py = _forced_probes(space, pair)
    consume("probe", px, py)

    rnd = 0
    while used < budget:
        batch_best = None
        for name, xs, ys in space.strata(rng, batch):
            got = consume("random:" + name, xs, ys)
            if got is not None and (batch_best is None or got["margin"] < batch_best["margin"]):
                batch_best = got
        incumbent = batch_best if rnd % 2 == 0 and batch_best is not None else best
        for s in range(steps):
            if used >= budget or incumbent is None:
                break
            sigma = 0.1 * 0.25 ** s
            xs = np.full(local, incumbent["x"])
            ys = np.full(local, incumbent["y"])
            mode = rng.integers(0, 3, size=local)
            xs = np.where(mode != 1, space.perturb(rng, xs, sigma), xs)
            ys = np.where(mode != 0, space.perturb(rng, ys, sigma), ys)
            got = consume("local", xs, ys)
            if got is not None and got["margin"] < incumbent["margin"]:
                incumbent = got
        rnd += 1
    return _finish(best, diag, used, tol)
