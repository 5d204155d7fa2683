"""Named instances (space, map, pair, expectations) and the full check pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .conditions import (
    ShiftingPair,
    check_condition_i,
    check_condition_ii,
    default_grid,
    from_altering_pair,
    from_banach,
)
from .config import ChecksConfig, Config, Expected, SolverConfig
from .metric import ClosureError, MetricSpace, SelfMap, hybrid_space, interval_space, verify_closure
from .scalar_fn import Interval, Piece, Piecewise, ScalarFn, parse_expr, scalar_fn
from .seeding import stream
from .solver import AMBIGUOUS, CONVERGED, UNIQUE, picard, probe_uniqueness
from .verifier import check_contraction

__all__ = ["Instance", "instance", "list_instances", "paper_pair", "ln_pair", "run_instance", "UnknownInstance"]


class UnknownInstance(KeyError):
    pass


@dataclass
class Instance:
    name: str
    space: MetricSpace
    map: SelfMap
    pair: ShiftingPair
    expected: Expected
    x0: float
    notes: str = ""
    params: dict = field(default_factory=dict)

    def to_config(self) -> dict:
        return self.as_config().to_dict()

    def as_config(self) -> Config:
        return Config(self.space, self.map, self.pair, SolverConfig(x0=self.x0), ChecksConfig(),
                      self.expected, self.name)

    @classmethod
    def from_config(cls, cfg: Config) -> "Instance":
        cfg.require("space", "map", "pair")
        return cls(cfg.name, cfg.space, cfg.map, cfg.pair, cfg.expected or Expected(),
                   cfg.solver.x0 if cfg.solver.x0 is not None else float(cfg.space.landmarks[0]))


# ---------------------------------------------------------------------------
# building blocks

_UNIT = Interval(0.0, 1.0, True, True)
_ABOVE_ONE = Interval(1.0, math.inf, False, False)


def _piecewise_ln(lower: str, upper: str) -> ScalarFn:
    return ScalarFn((Piece(_UNIT, parse_expr(f"ln(1/12 + {lower}/12*t)")),
                     Piece(_ABOVE_ONE, parse_expr(f"ln(1/12 + {upper}/12*t)"))))


def paper_pair() -> ShiftingPair:
    """Piecewise logarithmic pair of the hybrid-space example (breakpoint at 1)."""
    return ShiftingPair(_piecewise_ln("5", "4"), _piecewise_ln("3", "2"), origin="paper-example")


def ln_pair() -> ShiftingPair:
    """``psi = ln((1+2t)/2)``, ``phi = ln((1+t)/2)``."""
    return ShiftingPair(scalar_fn("ln((1+2*t)/2)"), scalar_fn("ln((1+t)/2)"), origin="ln-pair")


def _map(*pieces: tuple[Interval, str], description: str = "") -> SelfMap:
    return SelfMap(Piecewise(tuple(Piece(iv, parse_expr(src, ("x", "t"))) for iv, src in pieces)), description)


def paper_map() -> SelfMap:
    # x = 1 belongs to the constant branch, as in the map's defining formula
    return _map((Interval(0.0, 1.0, True, False), "x/5"),
                (Interval(1.0, math.inf, True, False), "3/125"),
                description="x/5 on [0,1), 3/125 on {1,2,3,...}")


def paper_map_case1() -> SelfMap:
    return _map((Interval(0.0, 1.0, True, True), "x/5"),
                (Interval(1.0, math.inf, False, False), "3/125"),
                description="x/5 on [0,1], 3/125 on {2,3,...}")


def _affine_map(k: float, c: float, lo: float, hi: float) -> SelfMap:
    return _map((Interval(lo, hi, True, True), f"{k!r}*x + {(1.0 - k) * c!r}"),
                description=f"{k!r}*x + (1-{k!r})*{c!r}")


# ---------------------------------------------------------------------------
# registry


def _paper_example(**_) -> Instance:
    return Instance(
        "paper-example", hybrid_space(), paper_map(), paper_pair(),
        # x/5 = x only at 0; integers map to 3/125, so none is fixed
        Expected(fixed_point=0.0, contraction_holds=True, pair_conditions_hold=True),
        x0=4.0,
        notes="Hybrid space [0,1] U {2,3,...}; T(1) = 3/125 as written in the map's formula.",
    )


def _paper_example_case1(**_) -> Instance:
    inst = _paper_example()
    inst.name = "paper-example-case1"
    inst.map = paper_map_case1()
    inst.notes = "Same triple with x = 1 on the x/5 branch, the reading used by the case analysis."
    return inst


def _ln_pair_banach_half(**_) -> Instance:
    return Instance(
        "ln-pair-banach-half", interval_space(0, 1),
        _map((_UNIT, "x/2"), description="x/2"), ln_pair(),
        # psi(d/2) = ln((1+d)/2) = phi(d): equality, so the margin is 0 everywhere
        Expected(fixed_point=0.0, contraction_holds=True, pair_conditions_hold=True),
        x0=1.0,
    )


def _banach_k(k: float = 0.5, c: float = 1.0, **_) -> Instance:
    k, c = float(k), float(c)
    if not c > 0:
        raise ValueError(f"banach-k needs c > 0, got {c!r}")
    return Instance(
        "banach-k", interval_space(0, 2 * c), _affine_map(k, c, 0.0, 2 * c), from_banach(k),
        Expected(fixed_point=c, contraction_holds=True, pair_conditions_hold=True),
        x0=0.0, params={"k": k, "c": c},
        notes="Tx = kx + (1-k)c on [0, 2c]; fixed point c.",
    )


def _dc_reduction(**_) -> Instance:
    return Instance(
        "dc-reduction", interval_space(0, 1), _map((_UNIT, "x/2"), description="x/2"),
        from_altering_pair(scalar_fn("t"), scalar_fn("t/2")),
        Expected(fixed_point=0.0, contraction_holds=True, pair_conditions_hold=True),
        x0=1.0,
    )


def _negative_identity(**_) -> Instance:
    return Instance(
        "negative-identity", interval_space(0, 1), _map((_UNIT, "x"), description="identity"), ln_pair(),
        # psi(d) > phi(d) for every d > 0; every point is fixed
        Expected(fixed_point=None, contraction_holds=False, pair_conditions_hold=True),
        x0=0.3,
    )


_REGISTRY: dict[str, Callable[..., Instance]] = {
    "paper-example": _paper_example,
    "paper-example-case1": _paper_example_case1,
    "ln-pair-banach-half": _ln_pair_banach_half,
    "banach-k": _banach_k,
    "dc-reduction": _dc_reduction,
    "negative-identity": _negative_identity,
}


def list_instances() -> list[str]:
    return list(_REGISTRY)


def instance(name: str, **params) -> Instance:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownInstance(f"unknown instance {name!r}; known: {', '.join(_REGISTRY)}") from None
    return factory(**params)


# ---------------------------------------------------------------------------
# pipeline


def run_instance(inst: Instance, checks: ChecksConfig | None = None, solver: SolverConfig | None = None) -> dict:
    """Closure, both pair conditions, contraction, Picard and the uniqueness probe.

    Returns the individual reports and an ``expectations`` map of booleans;
    ``all_met`` is their conjunction.
    """
    checks = (checks or ChecksConfig()).resolved(inst.space)
    solver = solver or SolverConfig()
    x0 = solver.x0 if solver.x0 is not None else inst.x0
    seed = checks.seed
    out: dict = {"instance": inst.name, "params": inst.params}

    closure = verify_closure(inst.space, inst.map, seed=stream(seed, "closure"), n=checks.n_closure)
    cond_i = check_condition_i(inst.pair, seed=stream(seed, "condition_i"), n=checks.n_condition_i,
                               tol_eq=checks.tol_eq, tol_ord=checks.tol_ord, u_max=checks.u_max)
    cond_ii = check_condition_ii(inst.pair, default_grid(inst.pair, checks.u_max, checks.grid_points),
                                 tol=checks.tol)
    out["closure"] = closure.to_dict()
    out["condition_i"] = cond_i.to_dict()
    out["condition_ii"] = cond_ii.to_dict()

    expectations = {"closure": closure.ok}
    pair_ok = cond_i.passed and cond_ii.passed
    expectations["pair_conditions"] = pair_ok == inst.expected.pair_conditions_hold

    contraction = None
    if closure.ok:
        try:
            contraction = check_contraction(inst.space, inst.map, inst.pair, seed=seed, n=checks.n_contraction,
                                            tol=checks.tol, closure_n=checks.n_closure)
        except ClosureError:
            contraction = None
    out["contraction"] = contraction.to_dict() if contraction else None
    if inst.expected.contraction_holds:
        expectations["contraction"] = contraction is not None and contraction.passed
    else:
        expectations["contraction"] = contraction is not None and not contraction.passed \
            and contraction.witness is not None

    trace = picard(inst.space, inst.map, x0, tol_fix=solver.tol_fix, max_iter=solver.max_iter)
    out["solve"] = {"x0": x0, **trace.to_dict()}
    uniq = probe_uniqueness(inst.space, inst.map, seed=stream(seed, "uniqueness"), n_starts=checks.n_starts,
                            tol_fix=solver.tol_fix, tol_unique=checks.tol_unique, max_iter=solver.max_iter)
    out["uniqueness"] = uniq.to_dict()

    fp = inst.expected.fixed_point
    if fp is None:
        expectations["uniqueness"] = uniq.verdict == AMBIGUOUS
    else:
        expectations["solve"] = trace.verdict == CONVERGED and \
            float(inst.space.distance(trace.fixed_point, fp)) <= checks.tol_unique
        expectations["uniqueness"] = uniq.verdict == UNIQUE and all(
            float(inst.space.distance(z, fp)) <= checks.tol_unique for z in uniq.limits)
    out["expected"] = inst.expected.to_dict()
    out["expectations"] = expectations
    out["all_met"] = all(expectations.values())
    return out
