"""Picard iteration ``x_{n+1} = T x_n`` with diagnostics.

The trace records the step distances ``u_n = d(x_{n+1}, x_n)``.  Under a
valid shifting pair these never increase, so ``monotone_violations > 0``
points at a broken hypothesis rather than a solver fault.  Whether the limit
is a fixed point is judged by the residual ``d(x_N, T x_N)`` at the last
iterate.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import TextIO

from .metric import MetricSpace, NonMemberError, SelfMap, apply
from .seeding import as_rng

CONVERGED, MAX_ITER, DIVERGED = "converged", "max_iter_reached", "diverged"
UNIQUE, AMBIGUOUS = "unique", "ambiguous"

MONOTONE_TOL = 1e-12
DIVERGENCE_FACTOR = 1e6

__all__ = [
    "IterationTrace",
    "UniquenessReport",
    "picard",
    "cauchy_check",
    "probe_uniqueness",
    "write_trace_csv",
]


@dataclass
class IterationTrace:
    iterates: list[float]
    step_distances: list[float]
    residual: float
    verdict: str
    monotone_violations: int
    space: MetricSpace = field(repr=False, compare=False)
    tol_fix: float = 0.0

    @property
    def fixed_point(self) -> float:
        return self.iterates[-1]

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    def residuals(self) -> list[float]:
        """``d(x_n, T x_n)`` for every iterate; for ``n < N`` this equals ``u_n``."""
        return [*self.step_distances, self.residual]

    def to_dict(self, include_iterates: bool = False) -> dict:
        out = {
            "verdict": self.verdict,
            "fixed_point": self.fixed_point,
            "residual": self.residual,
            "iterations": self.iterations,
            "monotone_violations": self.monotone_violations,
            "tol_fix": self.tol_fix,
        }
        if include_iterates:
            out["iterates"] = list(self.iterates)
            out["step_distances"] = list(self.step_distances)
        return out


def picard(space: MetricSpace, map: SelfMap, x0: float, tol_fix: float = 1e-12,
           max_iter: int = 10_000) -> IterationTrace:
    if not tol_fix > 0 or max_iter < 1:
        raise ValueError("tol_fix must be > 0 and max_iter >= 1")
    if not space.contains(x0):
        raise NonMemberError(f"start {x0!r} is not a member of {space.description}")
    x = float(space.canonical(float(x0)))
    iterates = [x]
    steps: list[float] = []
    violations = 0
    verdict = MAX_ITER
    while True:
        tx = apply(map, x, space)
        r = float(space.distance(x, tx))
        if r <= tol_fix:
            verdict = CONVERGED
            break
        if steps and r > DIVERGENCE_FACTOR * steps[0]:
            verdict = DIVERGED
            break
        if len(steps) == max_iter:
            break
        if steps and r > steps[-1] + MONOTONE_TOL:
            violations += 1
        steps.append(r)
        iterates.append(tx)
        x = tx
    return IterationTrace(iterates, steps, r, verdict, violations, space, tol_fix)


def cauchy_check(trace: IterationTrace, window: int, tol: float) -> bool:
    """True iff every pair among the last ``window`` iterates is within ``tol``."""
    if window < 1 or len(trace.iterates) < window + 1:
        raise ValueError(f"window {window} needs at least {window + 1} iterates, trace has {len(trace.iterates)}")
    tail = trace.iterates[-window:]
    return all(float(trace.space.distance(a, b)) <= tol for a, b in itertools.combinations(tail, 2))


@dataclass
class UniquenessReport:
    starts: list[float]
    limits: list[float]
    max_pairwise_distance: float
    verdict: str
    runs: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "starts": self.starts,
            "limits": self.limits,
            "max_pairwise_distance": self.max_pairwise_distance,
            "runs": self.runs,
        }


def probe_uniqueness(space: MetricSpace, map: SelfMap, seed=0, n_starts: int = 10, tol_fix: float = 1e-12,
                     tol_unique: float = 1e-9, max_iter: int = 10_000) -> UniquenessReport:
    """Run Picard from ``n_starts`` sampled starts and compare the limits."""
    if n_starts < 2:
        raise ValueError("n_starts must be >= 2")
    starts = [float(s) for s in space.sample(as_rng(seed), n_starts)]
    limits, runs = [], []
    all_converged = True
    for s in starts:
        trace = picard(space, map, s, tol_fix=tol_fix, max_iter=max_iter)
        limits.append(trace.fixed_point)
        runs.append({"start": s, "verdict": trace.verdict, "iterations": trace.iterations,
                     "residual": trace.residual})
        all_converged &= trace.verdict == CONVERGED
    spread = max(float(space.distance(a, b)) for a, b in itertools.combinations(limits, 2))
    verdict = UNIQUE if all_converged and spread <= tol_unique else AMBIGUOUS
    return UniquenessReport(starts, limits, spread, verdict, runs)


def write_trace_csv(trace: IterationTrace, out: TextIO) -> None:
    """Columns ``n, x_n, u_n, residual``; ``u_n`` is blank on the last row."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["n", "x_n", "u_n", "residual"])
    residuals = trace.residuals()
    for n, x in enumerate(trace.iterates):
        u = repr(trace.step_distances[n]) if n < len(trace.step_distances) else ""
        writer.writerow([n, repr(float(x)), u, repr(float(residuals[n]))])


def banach_bound(k: float, n: int, first_step: float) -> float:
    """A-priori error ``k^n d(x_0, x_1) / (1 - k)`` of a Banach contraction."""
    return k ** n * first_step / (1.0 - k) if k < 1 else math.inf

