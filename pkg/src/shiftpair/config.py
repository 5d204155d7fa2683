"""JSON config schema.

A config binds a space, a map and a pair, plus solver and check settings::

    {
      "schema_version": 1,
      "space": {"kind": "hybrid", "n_int": 50},
      "map":   {"pieces": [{"interval": {"lo": 0, "hi": 1, "lo_closed": true, "hi_closed": false},
                            "expr": "x/5"}, ...]},
      "pair":  {"psi": [...pieces...], "phi": [...pieces...]}
               or {"reduction": "banach", "k": "1/2"}
               or {"reduction": "khan", "psi": [...], "c": 0.5}
               or {"reduction": "altering", "psi": [...], "varphi": [...]},
      "solver": {"x0": 4, "tol_fix": 1e-12, "max_iter": 10000},
      "checks": {"seed": 0, ...}
    }

Numbers may be strings such as ``"3/125"``; ``"+inf"`` closes the last piece.
Every error is a :class:`ConfigError` naming the offending field.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .conditions import DEFAULT_GRID_POINTS, ShiftingPair, pair_from_config
from .metric import HybridSpace, MetricSpace, SelfMap, space_from_config
from .scalar_fn import CoverageError, ParseError, ScalarFn, parse_number

SCHEMA_VERSION = 1

__all__ = ["ConfigError", "ChecksConfig", "SolverConfig", "Expected", "Config", "load_config", "config_from_dict"]


class ConfigError(ValueError):
    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass
class ChecksConfig:
    seed: int = 0
    n_closure: int = 10_000
    n_condition_i: int = 100_000
    n_contraction: int = 100_000
    search_budget: int = 20_000
    grid_points: int = DEFAULT_GRID_POINTS
    n_int: int | None = None
    u_max: float | None = None
    tol_eq: float = 1e-9
    tol_ord: float = 1e-9
    tol: float = 1e-9
    tol_unique: float = 1e-9
    n_starts: int = 10

    def resolved(self, space: MetricSpace | None) -> "ChecksConfig":
        """Fill ``n_int`` and ``u_max`` from the space (``u_max = 2 n_int + 1``)."""
        n_int = self.n_int
        if n_int is None:
            n_int = space.n_int if isinstance(space, HybridSpace) else 50
        u_max = self.u_max if self.u_max is not None else 2 * n_int + 1
        return dataclasses.replace(self, n_int=int(n_int), u_max=float(u_max))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SolverConfig:
    x0: float | None = None
    tol_fix: float = 1e-12
    max_iter: int = 10_000

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class Expected:
    fixed_point: float | None = None
    contraction_holds: bool = True
    pair_conditions_hold: bool = True

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class Config:
    space: MetricSpace | None = None
    map: SelfMap | None = None
    pair: ShiftingPair | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    checks: ChecksConfig = field(default_factory=ChecksConfig)
    expected: Expected | None = None
    name: str = ""

    def require(self, *parts: str) -> None:
        for part in parts:
            if getattr(self, part) is None:
                raise ConfigError(part, "missing (required by this command)")

    def echo(self) -> dict:
        return {"solver": self.solver.to_dict(), "checks": self.checks.resolved(self.space).to_dict()}

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        if self.name:
            out["name"] = self.name
        if self.space is not None:
            out["space"] = self.space.to_config()
        if self.map is not None:
            out["map"] = self.map.to_config()
        if self.pair is not None:
            out["pair"] = self.pair.to_config()
        out["solver"] = self.solver.to_dict()
        out["checks"] = self.checks.to_dict()
        if self.expected is not None:
            out["expected"] = self.expected.to_dict()
        return out


# ---------------------------------------------------------------------------
# loading


def _number(value, where: str) -> float:
    try:
        return parse_number(value)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    v = _number(value, where)
    if v != int(v):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    return int(v)


def _section(data: dict, key: str) -> dict:
    value = data.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(key, "expected an object")
    return value


def _check_pieces(pieces, where: str) -> None:
    if not isinstance(pieces, list) or not pieces:
        raise ConfigError(where, "expected a nonempty list of pieces")
    for k, piece in enumerate(pieces):
        here = f"{where}[{k}]"
        if not isinstance(piece, dict):
            raise ConfigError(here, "expected an object with 'interval' and 'expr'")
        for key in ("interval", "expr"):
            if key not in piece:
                raise ConfigError(f"{here}.{key}", "missing")
        iv = piece["interval"]
        if not isinstance(iv, dict):
            raise ConfigError(f"{here}.interval", "expected an object")
        for key in ("lo", "hi"):
            if key not in iv:
                raise ConfigError(f"{here}.interval.{key}", "missing")
            _number(iv[key], f"{here}.interval.{key}")
        for key in ("lo_closed", "hi_closed"):
            if key in iv and not isinstance(iv[key], bool):
                raise ConfigError(f"{here}.interval.{key}", "expected true or false")
        if not isinstance(piece["expr"], str):
            raise ConfigError(f"{here}.expr", "expected a string")


def _build(where: str, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except ParseError as exc:
        raise ConfigError(where, f"bad expression: {exc}") from None
    except CoverageError as exc:
        raise ConfigError(where, f"pieces do not partition the domain: {exc}") from None
    except (ValueError, KeyError, TypeError, ArithmeticError) as exc:
        raise ConfigError(where, str(exc)) from None


def _fn_pieces(spec, where: str):
    # accept either a bare list of pieces or {"pieces": [...]}
    if isinstance(spec, dict) and "pieces" in spec:
        spec, where = spec["pieces"], f"{where}.pieces"
    _check_pieces(spec, where)
    return spec, where


def _pair(spec: dict, seed: int) -> ShiftingPair:
    if not isinstance(spec, dict):
        raise ConfigError("pair", "expected an object")
    reduction = spec.get("reduction")
    normalized = dict(spec)
    names = {None: ("psi", "phi"), "banach": (), "khan": ("psi",), "altering": ("psi", "varphi")}
    if reduction not in names:
        raise ConfigError("pair.reduction", f"unknown reduction {reduction!r}")
    for key in names[reduction]:
        if key not in spec:
            raise ConfigError(f"pair.{key}", "missing")
        pieces, where = _fn_pieces(spec[key], f"pair.{key}")
        normalized[key] = pieces
        _build(where, ScalarFn.from_config, pieces)
    for key in {"banach": ("k",), "khan": ("c",)}.get(reduction, ()):
        if key not in spec:
            raise ConfigError(f"pair.{key}", "missing")
        _number(spec[key], f"pair.{key}")
    return _build("pair", pair_from_config, normalized, seed)


def config_from_dict(data: Any) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}")

    checks_raw = _section(data, "checks")
    checks = ChecksConfig()
    for f in dataclasses.fields(ChecksConfig):
        if f.name in checks_raw and checks_raw[f.name] is not None:
            where = f"checks.{f.name}"
            is_int = f.name in ("seed", "n_closure", "n_condition_i", "n_contraction", "search_budget",
                                "grid_points", "n_int", "n_starts")
            value = _integer(checks_raw[f.name], where) if is_int else _number(checks_raw[f.name], where)
            setattr(checks, f.name, value)
    unknown = set(checks_raw) - {f.name for f in dataclasses.fields(ChecksConfig)}
    if unknown:
        raise ConfigError(f"checks.{sorted(unknown)[0]}", "unknown field")
    for name in ("n_closure", "n_condition_i", "n_contraction", "search_budget", "grid_points", "n_starts"):
        if getattr(checks, name) < 1:
            raise ConfigError(f"checks.{name}", "must be >= 1")

    solver_raw = _section(data, "solver")
    solver = SolverConfig()
    if solver_raw.get("x0") is not None:
        solver.x0 = _number(solver_raw["x0"], "solver.x0")
    if "tol_fix" in solver_raw:
        solver.tol_fix = _number(solver_raw["tol_fix"], "solver.tol_fix")
    if "max_iter" in solver_raw:
        solver.max_iter = _integer(solver_raw["max_iter"], "solver.max_iter")

    space = None
    if "space" in data:
        space_raw = _section(data, "space")
        if checks.n_int is not None and space_raw.get("kind") == "hybrid" and "n_int" not in space_raw:
            space_raw = {**space_raw, "n_int": checks.n_int}
        space = _build("space", space_from_config, space_raw)

    map_ = None
    if "map" in data:
        map_raw = _section(data, "map")
        if "pieces" not in map_raw:
            raise ConfigError("map.pieces", "missing")
        _check_pieces(map_raw["pieces"], "map.pieces")
        map_ = _build("map.pieces", SelfMap.from_config, map_raw)

    pair = _pair(data["pair"], checks.seed) if "pair" in data else None

    expected = None
    if "expected" in data:
        raw = _section(data, "expected")
        fp = raw.get("fixed_point")
        expected = Expected(
            fixed_point=None if fp is None else _number(fp, "expected.fixed_point"),
            contraction_holds=bool(raw.get("contraction_holds", True)),
            pair_conditions_hold=bool(raw.get("pair_conditions_hold", True)),
        )
    name = data.get("name", "")
    return Config(space, map_, pair, solver, checks, expected, str(name))


def load_config(path: str | Path) -> Config:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", f"invalid JSON: {exc.msg}") from None
    return config_from_dict(data)
