"""Metric spaces embedded in the real line, self-maps, and sampling checks.

Completeness is never tested numerically.  Each built-in space documents why
it is complete; the checks here only cover the finitely checkable axioms and
the closure ``T(X) subset X``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .scalar_fn import DomainError, Piecewise, parse_number
from .seeding import as_rng

INTEGER_SNAP = 1e-9

__all__ = [
    "NonMemberError",
    "ClosureError",
    "MetricSpace",
    "IntervalSpace",
    "HybridSpace",
    "FiniteSpace",
    "CustomSpace",
    "interval_space",
    "hybrid_space",
    "SelfMap",
    "apply",
    "AxiomCheck",
    "AxiomReport",
    "check_metric_axioms",
    "ClosureReport",
    "verify_closure",
]


class NonMemberError(ValueError):
    """A point handed to a map or solver is not in the space."""


class ClosureError(ValueError):
    """The map sends a member outside the space."""


def _scalar_or_array(out, *inputs):
    if any(isinstance(a, np.ndarray) for a in inputs):
        return out
    return float(out)


class MetricSpace:
    """Base class.  Subclasses provide membership, distance and a sampler.

    ``distance`` and ``contains`` are vectorized over numpy arrays.
    ``landmarks`` are deterministic points (endpoints, breakpoints) that the
    checkers always include next to random samples.
    """

    kind = "abstract"
    description = ""
    landmarks: tuple[float, ...] = ()

    def contains(self, x):
        raise NotImplementedError

    membership = property(lambda self: self.contains)

    def canonical(self, x):
        return x

    def distance(self, x, y):
        raise NotImplementedError

    def sample(self, rng, count: int) -> np.ndarray:
        raise NotImplementedError

    def perturb(self, rng, xs: np.ndarray, sigma: float) -> np.ndarray:
        """Random nearby members; ``sigma`` is a relative step size."""
        raise NotImplementedError

    def strata(self, rng, n: int) -> list[tuple[str, np.ndarray, np.ndarray]]:
        """Structured pair samples; by default just independent draws."""
        return [("random", self.sample(rng, n), self.sample(rng, n))]

    def to_config(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no config form")

    def summary(self) -> dict:
        return {"kind": self.kind, "description": self.description}

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.description}>"


@dataclass(frozen=True, repr=False)
class IntervalSpace(MetricSpace):
    """``[lo, hi]`` with ``|x - y|``.  Closed subsets of R are complete."""

    lo: float
    hi: float
    kind = "interval"

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"invalid interval bounds lo={self.lo!r}, hi={self.hi!r}")

    @property
    def description(self) -> str:
        return f"[{self.lo:g}, {self.hi:g}] with |x-y|"

    @property
    def landmarks(self) -> tuple[float, ...]:
        return tuple(float(v) for v in np.linspace(self.lo, self.hi, 5))

    def contains(self, x):
        a = np.asarray(x, dtype=float)
        ok = (a >= self.lo) & (a <= self.hi)
        return ok if isinstance(x, np.ndarray) else bool(ok)

    def distance(self, x, y):
        return _scalar_or_array(np.abs(np.asarray(x, float) - np.asarray(y, float)), x, y)

    def sample(self, rng, count):
        return as_rng(rng).uniform(self.lo, self.hi, size=count)

    def perturb(self, rng, xs, sigma):
        step = as_rng(rng).normal(0.0, sigma * (self.hi - self.lo), size=np.shape(xs))
        return np.clip(np.asarray(xs, float) + step, self.lo, self.hi)

    def to_config(self):
        return {"kind": "interval", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True, repr=False)
class HybridSpace(MetricSpace):
    """``X = [0,1] U {2, 3, 4, ...}`` with the three-branch metric.

    ``d(x,y) = |x-y|`` when both lie in ``[0,1]``, ``x+y`` otherwise, ``0`` on
    the diagonal.  Complete: a Cauchy sequence either stays eventually in
    ``[0,1]`` or is eventually constant, since distinct points with an
    integer coordinate are at least 2 apart.

    The integer part is unbounded; sampling and local search cap it at
    ``n_int``.
    """

    n_int: int = 50
    kind = "hybrid"

    def __post_init__(self):
        if int(self.n_int) != self.n_int or self.n_int < 2:
            raise ValueError(f"n_int must be an integer >= 2, got {self.n_int!r}")

    @property
    def description(self) -> str:
        return f"[0,1] U {{2,...}} (sampled up to {self.n_int})"

    @property
    def landmarks(self) -> tuple[float, ...]:
        return (0.0, 0.5, 1.0, 2.0, 3.0, float(self.n_int))

    def canonical(self, x):
        a = np.asarray(x, dtype=float)
        r = np.round(a)
        snapped = np.where((np.abs(a - r) <= INTEGER_SNAP) & (r >= 2), r, a)
        return _scalar_or_array(snapped, x)

    def contains(self, x):
        a = np.asarray(x, dtype=float)
        r = np.round(a)
        ok = ((a >= 0) & (a <= 1)) | ((np.abs(a - r) <= INTEGER_SNAP) & (r >= 2))
        return ok if isinstance(x, np.ndarray) else bool(ok)

    def distance(self, x, y):
        a = np.asarray(self.canonical(np.asarray(x, float)), float)
        b = np.asarray(self.canonical(np.asarray(y, float)), float)
        unit = (a >= 0) & (a <= 1) & (b >= 0) & (b <= 1)
        d = np.where(a == b, 0.0, np.where(unit, np.abs(a - b), a + b))
        return _scalar_or_array(d, x, y)

    def _fractional(self, rng, count):
        return rng.uniform(0.0, 1.0, size=count)

    def _integers(self, rng, count):
        return rng.integers(2, self.n_int + 1, size=count).astype(float)

    def sample(self, rng, count):
        rng = as_rng(rng)
        pick_int = rng.random(count) < 0.5
        return np.where(pick_int, self._integers(rng, count), self._fractional(rng, count))

    def strata(self, rng, n):
        rng = as_rng(rng)
        q = n // 4
        sizes = [q, q, q, n - 3 * q]
        frac = (self._fractional(rng, sizes[0]), self._fractional(rng, sizes[0]))
        ints = self._integers(rng, sizes[1])
        fr = self._fractional(rng, sizes[1])
        swap = rng.random(sizes[1]) < 0.5
        mixed = (np.where(swap, fr, ints), np.where(swap, ints, fr))
        both_int = (self._integers(rng, sizes[2]), self._integers(rng, sizes[2]))
        rand = (self.sample(rng, sizes[3]), self.sample(rng, sizes[3]))
        return [
            ("fractional", *frac),
            ("mixed", *mixed),
            ("integer", *both_int),
            ("random", *rand),
        ]

    def perturb(self, rng, xs, sigma):
        rng = as_rng(rng)
        xs = np.asarray(self.canonical(np.asarray(xs, float)), float)
        is_int = xs >= 2
        frac = np.clip(xs + rng.normal(0.0, sigma, size=xs.shape), 0.0, 1.0)
        ints = np.clip(xs + rng.choice([-1.0, 1.0], size=xs.shape), 2.0, float(self.n_int))
        return np.where(is_int, ints, frac)

    def to_config(self):
        return {"kind": "hybrid", "n_int": int(self.n_int)}

    def summary(self):
        return {**super().summary(), "n_int": int(self.n_int)}


@dataclass(frozen=True, repr=False)
class FiniteSpace(MetricSpace):
    """A finite set of reals with ``|x-y|`` or the discrete metric.  Finite metric spaces are complete."""

    points: tuple[float, ...]
    metric: str = "abs"
    kind = "finite"

    def __post_init__(self):
        pts = tuple(sorted({float(p) for p in self.points}))
        if not pts:
            raise ValueError("a finite space needs at least one point")
        if self.metric not in ("abs", "discrete"):
            raise ValueError(f"unknown finite metric {self.metric!r}")
        object.__setattr__(self, "points", pts)

    @property
    def description(self) -> str:
        return f"finite set of {len(self.points)} points ({self.metric} metric)"

    @property
    def landmarks(self) -> tuple[float, ...]:
        return self.points

    def contains(self, x):
        ok = np.isin(np.asarray(x, float), np.asarray(self.points))
        return ok if isinstance(x, np.ndarray) else bool(ok)

    def distance(self, x, y):
        a, b = np.asarray(x, float), np.asarray(y, float)
        d = np.abs(a - b) if self.metric == "abs" else (a != b).astype(float)
        return _scalar_or_array(d, x, y)

    def sample(self, rng, count):
        return as_rng(rng).choice(np.asarray(self.points), size=count)

    def perturb(self, rng, xs, sigma):
        return self.sample(rng, len(np.atleast_1d(xs)))

    def to_config(self):
        return {"kind": "finite", "points": list(self.points), "metric": self.metric}


@dataclass(frozen=True, repr=False)
class CustomSpace(MetricSpace):
    """Space built from plain callables, e.g. to probe a candidate metric."""

    membership_fn: Callable
    distance_fn: Callable
    sampler: Callable
    description: str = "custom"
    landmarks: tuple[float, ...] = ()
    kind = "custom"

    def contains(self, x):
        return self.membership_fn(x)

    def distance(self, x, y):
        return self.distance_fn(x, y)

    def sample(self, rng, count):
        return np.asarray(self.sampler(as_rng(rng), count), dtype=float)

    def perturb(self, rng, xs, sigma):
        return self.sample(rng, len(np.atleast_1d(xs)))


def interval_space(lo: float, hi: float) -> IntervalSpace:
    return IntervalSpace(float(lo), float(hi))


def hybrid_space(n_int: int = 50) -> HybridSpace:
    return HybridSpace(int(n_int))


def space_from_config(spec: dict) -> MetricSpace:
    kind = spec.get("kind")
    if kind == "interval":
        return interval_space(parse_number(spec["lo"]), parse_number(spec["hi"]))
    if kind == "hybrid":
        return hybrid_space(int(spec.get("n_int", 50)))
    if kind == "finite":
        return FiniteSpace(tuple(parse_number(p) for p in spec["points"]), spec.get("metric", "abs"))
    raise ValueError(f"unknown space kind {kind!r}")


# ---------------------------------------------------------------------------
# self-maps


@dataclass(frozen=True)
class SelfMap:
    """Piecewise rule ``x -> Tx``.  Expressions may use ``x`` or ``t``."""

    rule: Piecewise
    description: str = ""

    def __call__(self, x):
        return self.rule(x)

    @classmethod
    def from_config(cls, spec: dict) -> "SelfMap":
        return cls(Piecewise.from_config(spec["pieces"], variables=("x", "t")), spec.get("description", ""))

    def to_config(self) -> dict:
        return {"description": self.description, "pieces": self.rule.to_config()}

    def __str__(self) -> str:
        return self.description or str(self.rule)


def apply(map: SelfMap, x: float, space: MetricSpace | None = None) -> float:
    """Image of ``x``.  With a space, membership of ``x`` and of the image is enforced."""
    if space is not None:
        if not space.contains(x):
            raise NonMemberError(f"{x!r} is not a member of {space.description}")
        x = space.canonical(x)
    try:
        tx = float(map(float(x)))
    except DomainError as exc:
        raise NonMemberError(f"map is undefined at {x!r}: {exc}") from exc
    if space is not None:
        if not space.contains(tx):
            raise ClosureError(f"T({x!r}) = {tx!r} leaves {space.description}")
        tx = float(space.canonical(tx))
    return tx


def images(map: SelfMap, space: MetricSpace, xs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`apply`; raises :class:`ClosureError` on the first escape."""
    xs = np.asarray(space.canonical(np.asarray(xs, float)), float)
    try:
        tx = np.asarray(map(xs), float)
    except DomainError as exc:
        raise NonMemberError(f"map is undefined on part of the sample: {exc}") from exc
    inside = space.contains(tx)
    if not np.all(inside):
        k = int(np.argmin(inside))
        raise ClosureError(f"T({xs[k]!r}) = {tx[k]!r} leaves {space.description}")
    return np.asarray(space.canonical(tx), float)


# ---------------------------------------------------------------------------
# checks


@dataclass
class AxiomCheck:
    checked: int = 0
    violations: int = 0
    worst: float = 0.0
    witness: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "violations": self.violations,
            "worst": self.worst,
            "witness": None if self.witness is None else list(self.witness),
        }


@dataclass
class AxiomReport:
    identity: AxiomCheck
    nonnegativity: AxiomCheck
    symmetry: AxiomCheck
    triangle: AxiomCheck
    tol: float

    @property
    def ok(self) -> bool:
        return all(c.violations == 0 for c in (self.identity, self.nonnegativity, self.symmetry, self.triangle))

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "tol": self.tol,
            "identity": self.identity.to_dict(),
            "nonnegativity": self.nonnegativity.to_dict(),
            "symmetry": self.symmetry.to_dict(),
            "triangle": self.triangle.to_dict(),
        }


def _excess_check(excess: np.ndarray, points: Sequence[np.ndarray], tol: float) -> AxiomCheck:
    """Summarize ``excess`` (positive = bad); the witness is the first worst case."""
    check = AxiomCheck(checked=int(excess.size))
    if excess.size == 0:
        return check
    k = int(np.argmax(excess))
    check.violations = int(np.count_nonzero(excess > tol))
    check.worst = float(excess[k])
    check.witness = tuple(float(p[k]) for p in points)
    return check


def check_metric_axioms(space: MetricSpace, seed=0, n_pairs: int = 10_000, n_triples: int = 10_000,
                        tol: float = 1e-12) -> AxiomReport:
    if n_pairs < 1 or n_triples < 1 or not tol > 0:
        raise ValueError("n_pairs, n_triples must be >= 1 and tol > 0")
    rng = as_rng(seed)
    marks = np.asarray(space.landmarks, dtype=float)

    xs = np.concatenate([marks, space.sample(rng, n_pairs)])
    identity = _excess_check(np.abs(np.asarray(space.distance(xs, xs), float)), [xs], tol)

    lp = np.array(list(itertools.product(marks, repeat=2)), dtype=float).reshape(-1, 2)
    px = np.concatenate([lp[:, 0], space.sample(rng, n_pairs)])
    py = np.concatenate([lp[:, 1], space.sample(rng, n_pairs)])
    dxy = np.asarray(space.distance(px, py), float)
    dyx = np.asarray(space.distance(py, px), float)
    nonneg = _excess_check(-dxy, [px, py], tol)
    symmetry = _excess_check(np.abs(dxy - dyx), [px, py], tol)

    lt = np.array(list(itertools.product(marks, repeat=3)), dtype=float).reshape(-1, 3)
    tx = np.concatenate([lt[:, 0], space.sample(rng, n_triples)])
    ty = np.concatenate([lt[:, 1], space.sample(rng, n_triples)])
    tz = np.concatenate([lt[:, 2], space.sample(rng, n_triples)])
    excess = (np.asarray(space.distance(tx, tz), float)
              - np.asarray(space.distance(tx, ty), float)
              - np.asarray(space.distance(ty, tz), float))
    triangle = _excess_check(excess, [tx, ty, tz], tol)
    return AxiomReport(identity, nonneg, symmetry, triangle, tol)


@dataclass
class ClosureReport:
    checked: int
    violations: int
    witnesses: list[tuple[float, float | None]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checked": self.checked,
            "violations": self.violations,
            "witnesses": [{"x": x, "tx": tx} for x, tx in self.witnesses],
        }


def verify_closure(space: MetricSpace, map: SelfMap, seed=0, n: int = 10_000,
                   max_witnesses: int = 5) -> ClosureReport:
    """Check ``T x in X`` on landmarks plus ``n`` sampled members."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_rng(seed)
    marks = np.asarray(space.landmarks, dtype=float)
    xs = np.concatenate([marks, space.sample(rng, n)])
    xs = np.asarray(space.canonical(xs), float)
    witnesses: list[tuple[float, float | None]] = []
    bad = 0
    try:
        tx = np.asarray(map(xs), float)
        inside = np.asarray(space.contains(tx), bool)
    except DomainError:
        # fall back to pointwise evaluation to locate where the rule is undefined
        tx = np.empty_like(xs)
        inside = np.ones(xs.shape, dtype=bool)
        for k, x in enumerate(xs):
            try:
                tx[k] = map(float(x))
                inside[k] = space.contains(float(tx[k]))
            except DomainError:
                tx[k] = np.nan
                inside[k] = False
    for k in np.flatnonzero(~inside):
        bad += 1
        if len(witnesses) < max_witnesses:
            val = float(tx[k])
            witnesses.append((float(xs[k]), None if math.isnan(val) else val))
    return ClosureReport(checked=int(xs.size), violations=bad, witnesses=witnesses)
