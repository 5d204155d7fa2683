"""Shifting distance pairs: sampling checks of the two pair conditions,
the altering-distance check, and constructors from classical hypotheses.

Condition (i):  psi(u) <= phi(v)  implies  u <= v.
Condition (ii): if u_n -> w, v_n -> w and psi(u_n) <= phi(v_n) for all n,
then w = 0.

Condition (ii) quantifies over sequences and cannot be sampled directly.
For piecewise-continuous functions it is implied by a strict gap between the
one-sided limit sets, ``min lim psi(w) > max lim phi(w)`` at every ``w > 0``,
and that is what :func:`check_condition_ii` tests.  A failed gap is reported
as ``inconclusive``, never as ``violated``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .scalar_fn import ScalarFn, parse_number, scalar_fn
from .seeding import as_rng

PASS, VIOLATED, INCONCLUSIVE = "pass", "violated", "inconclusive"

DEFAULT_N_INT = 50
DEFAULT_RANGE = 2 * DEFAULT_N_INT + 1
DEFAULT_TOL = 1e-9
BREAKPOINT_OFFSET = 1e-6
DEFAULT_GRID_POINTS = 10_000

__all__ = [
    "ShiftingPair",
    "ConditionReport",
    "check_condition_i",
    "check_condition_ii",
    "condition_ii_gap",
    "default_grid",
    "check_altering",
    "from_banach",
    "from_khan",
    "from_altering_pair",
    "ReductionError",
]


class ReductionError(ValueError):
    """Parameters or input functions do not satisfy a reduction's hypotheses."""


@dataclass(frozen=True)
class ShiftingPair:
    psi: ScalarFn
    phi: ScalarFn
    origin: str = "explicit"

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.psi.breakpoints) | set(self.phi.breakpoints)))

    def to_config(self) -> dict:
        return {"psi": self.psi.to_config(), "phi": self.phi.to_config()}


@dataclass
class ConditionReport:
    verdict: str
    margin: float
    samples_used: int
    failures: int = 0
    witnesses: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def failed_clauses(self) -> list[str]:
        return sorted({w["clause"] for w in self.witnesses if "clause" in w})

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "margin": self.margin,
            "samples_used": self.samples_used,
            "failures": self.failures,
            "witnesses": self.witnesses,
        }


def _probe_points(breakpoints: Sequence[float], hi: float) -> np.ndarray:
    pts = []
    for b in breakpoints:
        pts.extend((b - BREAKPOINT_OFFSET, b, b + BREAKPOINT_OFFSET))
    return np.asarray([p for p in pts if 0 <= p <= hi], dtype=float)


def check_condition_i(pair: ShiftingPair, seed=0, n: int = 100_000, tol_eq: float = DEFAULT_TOL,
                      tol_ord: float = DEFAULT_TOL, u_max: float = DEFAULT_RANGE,
                      grid_points: int = 201, max_witnesses: int = 5) -> ConditionReport:
    """Search for ``(u, v)`` with ``psi(u) <= phi(v) - tol_eq`` and ``u > v + tol_ord``.

    Samples ``n`` uniform pairs on ``[0, u_max]^2`` and every pair of a
    deterministic grid that contains the breakpoints and their neighbours.
    ``margin`` is the smallest per-pair slack
    ``max(psi(u) - phi(v) + tol_eq, v - u + tol_ord)``; it is ``>= 0`` on pass.
    """
    if n < 1 or not (tol_eq > 0 and tol_ord > 0):
        raise ValueError("n must be >= 1 and tolerances > 0")
    rng = as_rng(seed)
    grid = np.unique(np.concatenate([np.linspace(0.0, u_max, grid_points),
                                     _probe_points(pair.breakpoints, u_max)]))
    gu, gv = np.meshgrid(grid, grid, indexing="ij")
    u = np.concatenate([gu.ravel(), rng.uniform(0.0, u_max, n)])
    v = np.concatenate([gv.ravel(), rng.uniform(0.0, u_max, n)])
    psi_u = np.asarray(pair.psi(u))
    phi_v = np.asarray(pair.phi(v))
    value_slack = psi_u - phi_v + tol_eq
    order_slack = v - u + tol_ord
    bad = (value_slack <= 0) & (order_slack < 0)
    slack = np.maximum(value_slack, order_slack)
    witnesses = []
    for k in np.flatnonzero(bad)[np.argsort(slack[bad], kind="stable")][:max_witnesses]:
        witnesses.append({"u": float(u[k]), "v": float(v[k]),
                          "psi_u": float(psi_u[k]), "phi_v": float(phi_v[k])})
    failures = int(np.count_nonzero(bad))
    return ConditionReport(
        verdict=VIOLATED if failures else PASS,
        margin=float(slack.min()),
        samples_used=int(u.size),
        failures=failures,
        witnesses=witnesses,
    )


def default_grid(pair: ShiftingPair, w_max: float = DEFAULT_RANGE,
                 n: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """``n`` uniform points on ``(0, w_max]`` plus breakpoints and ``breakpoint +- 1e-6``."""
    uniform = np.linspace(0.0, w_max, n + 1)[1:]
    grid = np.concatenate([uniform, _probe_points(pair.breakpoints, w_max)])
    return np.unique(grid[grid > 0])


def condition_ii_gap(pair: ShiftingPair, w: float) -> tuple[float, tuple[float, ...], tuple[float, ...]]:
    """``min lim psi(w) - max lim phi(w)`` together with both limit sets."""
    lp, lf = pair.psi.limit_values(w), pair.phi.limit_values(w)
    return min(lp) - max(lf), lp, lf


def check_condition_ii(pair: ShiftingPair, grid: Sequence[float] | None = None, tol: float = DEFAULT_TOL,
                       max_witnesses: int = 5) -> ConditionReport:
    if grid is None:
        grid = default_grid(pair)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be a nonempty set of points > 0")
    # breakpoints are the only places where the limit sets have more than one element
    breaks = set(pair.breakpoints)
    smooth = np.array([w not in breaks for w in grid.tolist()])
    gaps = np.empty(grid.size)
    gaps[smooth] = np.asarray(pair.psi(grid[smooth])) - np.asarray(pair.phi(grid[smooth]))
    limit_sets: dict[int, tuple] = {}
    for k in np.flatnonzero(~smooth):
        gaps[k], lp, lf = condition_ii_gap(pair, float(grid[k]))
        limit_sets[int(k)] = (lp, lf)
    bad = ~(gaps > tol)
    witnesses = []
    for k in np.flatnonzero(bad)[:max_witnesses]:
        w = float(grid[k])
        lp, lf = limit_sets.get(int(k)) or condition_ii_gap(pair, w)[1:]
        witnesses.append({"w": w, "psi_limits": list(lp), "phi_limits": list(lf), "gap": float(gaps[k])})
    failures = int(np.count_nonzero(bad))
    return ConditionReport(
        verdict=INCONCLUSIVE if failures else PASS,
        margin=float(gaps.min()),
        samples_used=int(grid.size),
        failures=failures,
        witnesses=witnesses,
    )


def check_altering(psi: ScalarFn, seed=0, n: int = 10_000, tol: float = DEFAULT_TOL,
                   t_max: float = DEFAULT_RANGE) -> ConditionReport:
    """Check the altering distance clauses on samples.

    (a) ``|psi(0)| <= tol``; (b) ``psi(t) > tol`` for sampled ``t > tol``;
    (c) nondecreasing along sorted samples; (d) continuous at breakpoints.
    Each witness names the clause it breaks.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_rng(seed)
    witnesses: list[dict] = []
    slacks = []

    at_zero = float(psi(0.0))
    slacks.append(tol - abs(at_zero))
    if abs(at_zero) > tol:
        witnesses.append({"clause": "a", "t": 0.0, "value": at_zero})

    ts = np.unique(np.concatenate([rng.uniform(0.0, t_max, n), _probe_points(psi.breakpoints, t_max), [0.0]]))
    vals = np.asarray(psi(ts))
    pos = ts > tol
    if pos.any():
        slack_b = vals[pos] - tol
        slacks.append(float(slack_b.min()))
        bad_b = np.flatnonzero(pos)[slack_b <= 0]
        if bad_b.size:
            k = int(bad_b[np.argmin(vals[bad_b])])
            witnesses.append({"clause": "b", "t": float(ts[k]), "value": float(vals[k]),
                              "count": int(bad_b.size)})

    rises = np.diff(vals) + tol
    slacks.append(float(rises.min()) if rises.size else 0.0)
    bad_c = np.flatnonzero(rises < 0)
    if bad_c.size:
        k = int(bad_c[np.argmin(rises[bad_c])])
        witnesses.append({"clause": "c", "t": [float(ts[k]), float(ts[k + 1])],
                          "value": [float(vals[k]), float(vals[k + 1])], "count": int(bad_c.size)})

    for b in psi.breakpoints:
        lims = psi.limit_values(b)
        spread = max(lims) - min(lims)
        slacks.append(tol - spread)
        if spread > tol:
            witnesses.append({"clause": "d", "t": float(b), "value": list(lims)})

    return ConditionReport(
        verdict=VIOLATED if witnesses else PASS,
        margin=float(min(slacks)),
        samples_used=int(ts.size + 1),
        failures=len(witnesses),
        witnesses=witnesses,
    )


# ---------------------------------------------------------------------------
# reductions


def from_banach(k: float) -> ShiftingPair:
    """``d(Tx,Ty) <= k d(x,y)`` as the pair ``(t, k t)``."""
    k = float(k)
    if not 0 <= k < 1:
        raise ReductionError(f"Banach constant must lie in [0, 1), got {k!r}")
    psi = scalar_fn("t")
    return ShiftingPair(psi, psi.scaled(k), origin=f"banach(k={k!r})")


def from_khan(psi: ScalarFn, c: float, seed=0) -> ShiftingPair:
    """``psi(d(Tx,Ty)) <= c psi(d(x,y))`` with altering ``psi``: the pair ``(psi, c psi)``."""
    c = float(c)
    if not 0 <= c < 1:
        raise ReductionError(f"Khan constant must lie in [0, 1), got {c!r}")
    report = check_altering(psi, seed=seed)
    if not report.passed:
        raise ReductionError(f"psi is not an altering distance function (clauses {report.failed_clauses})")
    return ShiftingPair(psi, psi.scaled(c), origin=f"khan(c={c!r})")


def from_altering_pair(psi: ScalarFn, varphi: ScalarFn, seed=0) -> ShiftingPair:
    """Weak contraction ``psi(d(Tx,Ty)) <= psi(d) - varphi(d)`` as the pair ``(psi, psi - varphi)``."""
    for name, f in (("psi", psi), ("varphi", varphi)):
        report = check_altering(f, seed=seed)
        if not report.passed:
            raise ReductionError(
                f"{name} is not an altering distance function (clauses {report.failed_clauses})")
    return ShiftingPair(psi, psi.combine(varphi, "-"), origin="altering")


def pair_from_config(spec: dict, seed=0) -> ShiftingPair:
    reduction = spec.get("reduction")
    if reduction is None:
        return ShiftingPair(ScalarFn.from_config(spec["psi"]), ScalarFn.from_config(spec["phi"]))
    if reduction == "banach":
        return from_banach(parse_number(spec["k"]))
    if reduction == "khan":
        return from_khan(ScalarFn.from_config(spec["psi"]), parse_number(spec["c"]), seed=seed)
    if reduction == "altering":
        return from_altering_pair(ScalarFn.from_config(spec["psi"]), ScalarFn.from_config(spec["varphi"]),
                                  seed=seed)
    raise ValueError(f"unknown reduction {reduction!r}")

