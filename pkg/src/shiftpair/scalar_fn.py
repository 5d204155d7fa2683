"""Piecewise-elementary real functions and a tiny expression language.

Expressions cover literals, one variable, ``+ - * /``, unary minus,
``ln(.)`` and ``abs(.)``.  A :class:`Piecewise` glues expressions onto
consecutive intervals; :class:`ScalarFn` is a piecewise function whose
pieces partition ``[0, inf)``.

Compiled expressions accept a Python float or a numpy array and return the
same kind, so the checkers can evaluate 10^5 points in one call.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

import numpy as np

Number = Union[float, np.ndarray]

__all__ = [
    "DomainError",
    "ParseError",
    "UnknownIdentifierError",
    "CoverageError",
    "Expression",
    "Lit",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse_expr",
    "parse_number",
    "Interval",
    "Piece",
    "Piecewise",
    "ScalarFn",
    "scalar_fn",
    "eval_fn",
    "limit_values",
]


class DomainError(ArithmeticError):
    """ln of a nonpositive value or division by zero during evaluation."""


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownIdentifierError(ParseError):
    pass


class CoverageError(ValueError):
    """Pieces leave a gap, overlap, or are out of order."""


# ---------------------------------------------------------------------------
# evaluation primitives


def _log(a: Number) -> Number:
    if isinstance(a, np.ndarray):
        bad = ~(a > 0)
        if bad.any():
            raise DomainError(f"ln of nonpositive value {a[bad][0]!r}")
        return np.log(a)
    if not a > 0:
        raise DomainError(f"ln of nonpositive value {a!r}")
    return math.log(a)


def _div(a: Number, b: Number) -> Number:
    if isinstance(b, np.ndarray):
        if (b == 0).any():
            raise DomainError("division by zero")
        return a / b
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def _abs(a: Number) -> Number:
    return np.abs(a) if isinstance(a, np.ndarray) else abs(a)


_FUNCS: dict[str, Callable[[Number], Number]] = {"ln": _log, "abs": _abs}
_BINOPS: dict[str, Callable[[Number, Number], Number]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
}
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


# ---------------------------------------------------------------------------
# AST


class Expression:
    """Base AST node.  Nodes are frozen dataclasses, so equal trees compare equal."""

    def compile(self) -> Callable[[Number], Number]:
        raise NotImplementedError

    def to_source(self) -> str:
        raise NotImplementedError

    def __call__(self, t: Number) -> Number:
        fn = self.__dict__.get("_compiled")
        if fn is None:
            fn = self.compile()
            object.__setattr__(self, "_compiled", fn)
        return fn(t)

    def __str__(self) -> str:
        return self.to_source()


@dataclass(frozen=True, eq=True)
class Lit(Expression):
    value: float

    def compile(self):
        v = float(self.value)
        return lambda t: v

    def to_source(self) -> str:
        v = float(self.value)
        if v.is_integer() and abs(v) < 1e16:
            return str(int(v))
        return repr(v)


@dataclass(frozen=True, eq=True)
class Var(Expression):
    name: str = "t"

    def compile(self):
        return lambda t: t

    def to_source(self) -> str:
        return self.name


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    operand: Expression

    def compile(self):
        f = self.operand.compile()
        return lambda t: -f(t)

    def to_source(self) -> str:
        inner = self.operand.to_source()
        if isinstance(self.operand, BinOp):
            inner = f"({inner})"
        return f"-{inner}"


@dataclass(frozen=True, eq=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression

    def compile(self):
        f, g, h = self.left.compile(), self.right.compile(), _BINOPS[self.op]
        return lambda t: h(f(t), g(t))

    def to_source(self) -> str:
        prec = _PREC[self.op]
        lhs, rhs = self.left.to_source(), self.right.to_source()
        if isinstance(self.left, BinOp) and _PREC[self.left.op] < prec:
            lhs = f"({lhs})"
        # left-associative: an equal-precedence right child needs parentheses
        if isinstance(self.right, BinOp) and _PREC[self.right.op] <= prec:
            rhs = f"({rhs})"
        return f"{lhs} {self.op} {rhs}"


@dataclass(frozen=True, eq=True)
class Call(Expression):
    func: str
    arg: Expression

    def compile(self):
        f, h = self.arg.compile(), _FUNCS[self.func]
        return lambda t: h(f(t))

    def to_source(self) -> str:
        return f"{self.func}({self.arg.to_source()})"


# ---------------------------------------------------------------------------
# parser


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/()])"
    r")"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.lastgroup is None:
            start = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ParseError(f"unexpected character {source[start]!r}", start,
                             ("number", "identifier", "operator", "'('"))
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self.source = source
        self.variables = tuple(variables)
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, off = self.peek()
        if text != value or kind == "end":
            raise ParseError(f"unexpected {text or 'end of input'!r}", off, (f"'{value}'",))
        self.advance()

    def parse(self) -> Expression:
        expr = self.additive()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", off, ("'+'", "'-'", "'*'", "'/'", "end of input"))
        return expr

    def additive(self) -> Expression:
        node = self.multiplicative()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.multiplicative())
        return node

    def multiplicative(self) -> Expression:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Expression:
        kind, text, off = self.peek()
        if kind == "num":
            self.advance()
            return Lit(float(text))
        if kind == "name":
            self.advance()
            if text in _FUNCS:
                self.expect("(")
                arg = self.additive()
                self.expect(")")
                return Call(text, arg)
            if text in self.variables:
                return Var(text)
            raise UnknownIdentifierError(
                f"unknown identifier {text!r}", off, (*self.variables, *_FUNCS)
            )
        if kind == "op" and text == "(":
            self.advance()
            node = self.additive()
            self.expect(")")
            return node
        raise ParseError(
            f"unexpected {text or 'end of input'!r}", off,
            ("number", "'('", "'-'", *self.variables, *(f + "(" for f in _FUNCS)),
        )


def parse_expr(source: str, variables: Sequence[str] = ("t",)) -> Expression:
    """Parse ``source`` into an AST.

    Precedence is unary minus over ``* /`` over ``+ -``; binary operators
    associate to the left.  Raises :class:`ParseError` carrying the offset of
    the offending token and the set of tokens that would have been accepted.
    """
    if not isinstance(source, str):
        raise ParseError("expression must be a string", 0)
    try:
        return _Parser(source, variables).parse()
    except ParseError as exc:
        byte_offset = len(source[: exc.offset].encode("utf-8"))
        if byte_offset != exc.offset:
            raise type(exc)(str(exc).split(" at offset ")[0], byte_offset, exc.expected) from None
        raise


def parse_number(value) -> float:
    """Read a config number: int, float, or a string such as ``"3/125"`` or ``"+inf"``."""
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return math.inf
        try:
            return float(Fraction(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a number: {value!r}") from exc
    raise ValueError(f"expected a number, got {value!r}")


# ---------------------------------------------------------------------------
# intervals and piecewise functions


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise CoverageError("interval endpoint is NaN")
        if math.isinf(self.lo):
            raise CoverageError("interval lower endpoint must be finite")
        if math.isinf(self.hi) and self.hi_closed:
            raise CoverageError("+inf cannot be a closed endpoint")
        if self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed)):
            raise CoverageError(f"empty interval {self}")

    def contains(self, t: Number) -> Number:
        lo_ok = (t >= self.lo) if self.lo_closed else (t > self.lo)
        hi_ok = (t <= self.hi) if self.hi_closed else (t < self.hi)
        return lo_ok & hi_ok

    def intersect(self, other: "Interval") -> "Interval | None":
        if self.lo > other.lo or (self.lo == other.lo and not self.lo_closed):
            lo, lo_closed = self.lo, self.lo_closed
        else:
            lo, lo_closed = other.lo, other.lo_closed
        if self.hi < other.hi or (self.hi == other.hi and not self.hi_closed):
            hi, hi_closed = self.hi, self.hi_closed
        else:
            hi, hi_closed = other.hi, other.hi_closed
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            return None
        return Interval(lo, hi, lo_closed, hi_closed)

    def to_config(self) -> dict:
        return {
            "lo": self.lo,
            "lo_closed": self.lo_closed,
            "hi": "+inf" if math.isinf(self.hi) else self.hi,
            "hi_closed": self.hi_closed,
        }

    def __str__(self) -> str:
        hi = "inf" if math.isinf(self.hi) else f"{self.hi:g}"
        return f"{'[' if self.lo_closed else '('}{self.lo:g}, {hi}{']' if self.hi_closed else ')'}"


@dataclass(frozen=True)
class Piece:
    interval: Interval
    expr: Expression

    def to_config(self) -> dict:
        return {"interval": self.interval.to_config(), "expr": self.expr.to_source()}


@dataclass(frozen=True)
class Piecewise:
    """Expressions on consecutive, non-overlapping intervals without gaps.

    The covered range is contiguous but may start anywhere; ScalarFn narrows
    this to exactly ``[0, inf)``.
    """

    pieces: tuple[Piece, ...]
    breakpoints: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise CoverageError("at least one piece is required")
        for k, (a, b) in enumerate(zip(pieces, pieces[1:]), start=1):
            ia, ib = a.interval, b.interval
            if ia.hi != ib.lo:
                kind = "gap" if ia.hi < ib.lo else "overlap or misordering"
                raise CoverageError(f"{kind} between piece {k - 1} {ia} and piece {k} {ib}")
            if ia.hi_closed == ib.lo_closed:
                kind = "overlap" if ia.hi_closed else "gap"
                raise CoverageError(f"{kind} at t={ia.hi:g} between piece {k - 1} and piece {k}")
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(
            self, "breakpoints", tuple(sorted({p.interval.hi for p in pieces[:-1]}))
        )

    @property
    def domain(self) -> Interval:
        first, last = self.pieces[0].interval, self.pieces[-1].interval
        return Interval(first.lo, last.hi, first.lo_closed, last.hi_closed)

    def piece_index(self, t: float) -> int:
        for k, p in enumerate(self.pieces):
            if p.interval.contains(t):
                return k
        raise DomainError(f"t={t!r} lies outside {self.domain}")

    def __call__(self, t: Number) -> Number:
        if isinstance(t, np.ndarray):
            return self._eval_array(t)
        return float(self.pieces[self.piece_index(t)].expr(float(t)))

    def _eval_array(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        claimed = np.zeros(t.shape, dtype=bool)
        for p in self.pieces:
            mask = p.interval.contains(t) & ~claimed
            if mask.any():
                out[mask] = p.expr(t[mask])
                claimed |= mask
        if not claimed.all():
            raise DomainError(f"t={t[~claimed].flat[0]!r} lies outside {self.domain}")
        return out

    def limit_values(self, w: float) -> tuple[float, ...]:
        """Value at ``w`` together with the one-sided limits from neighbouring pieces."""
        values = {self(w)}
        for p in self.pieces:
            iv = p.interval
            if iv.hi == w and not iv.hi_closed and w > self.domain.lo:
                values.add(float(p.expr(float(w))))
            if iv.lo == w and not iv.lo_closed:
                values.add(float(p.expr(float(w))))
        return tuple(sorted(values))

    def combine(self, other: "Piecewise", op: str) -> "Piecewise":
        """Pointwise ``self <op> other`` on the common refinement of both partitions."""
        pieces = []
        for a in self.pieces:
            for b in other.pieces:
                iv = a.interval.intersect(b.interval)
                if iv is not None:
                    pieces.append(Piece(iv, BinOp(op, a.expr, b.expr)))
        pieces.sort(key=lambda p: (p.interval.lo, not p.interval.lo_closed))
        return type(self)(tuple(pieces))

    def scaled(self, c: float) -> "Piecewise":
        return type(self)(tuple(Piece(p.interval, BinOp("*", Lit(float(c)), p.expr)) for p in self.pieces))

    def to_config(self) -> list[dict]:
        return [p.to_config() for p in self.pieces]

    @classmethod
    def from_config(cls, pieces: Sequence[dict], variables: Sequence[str] = ("t",)):
        built = []
        for k, spec in enumerate(pieces):
            iv = spec["interval"]
            interval = Interval(
                lo=parse_number(iv["lo"]),
                hi=parse_number(iv["hi"]),
                lo_closed=bool(iv.get("lo_closed", True)),
                hi_closed=bool(iv.get("hi_closed", False)),
            )
            built.append(Piece(interval, parse_expr(spec["expr"], variables)))
        return cls(tuple(built))

    def __str__(self) -> str:
        return "; ".join(f"{p.expr} on {p.interval}" for p in self.pieces)


class ScalarFn(Piecewise):
    """Piecewise function whose pieces partition ``[0, inf)`` exactly."""

    def __post_init__(self):
        super().__post_init__()
        first, last = self.pieces[0].interval, self.pieces[-1].interval
        if first.lo != 0 or not first.lo_closed:
            raise CoverageError(f"first piece must start at a closed 0, got {first}")
        if not math.isinf(last.hi):
            raise CoverageError(f"last piece must extend to +inf, got {last}")

    def __call__(self, t: Number) -> Number:
        if not isinstance(t, np.ndarray) and t < 0:
            raise DomainError(f"t={t!r} is negative")
        return super().__call__(t)


def scalar_fn(*pieces: tuple[str, Interval] | str) -> ScalarFn:
    """Shorthand: ``scalar_fn("t")`` or ``scalar_fn(("ln(t+1)", Interval(0, 1, True, True)), ...)``."""
    if len(pieces) == 1 and isinstance(pieces[0], str):
        return ScalarFn((Piece(Interval(0.0, math.inf, True, False), parse_expr(pieces[0])),))
    return ScalarFn(tuple(Piece(iv, parse_expr(src)) for src, iv in pieces))


def eval_fn(f: Piecewise, t: Number) -> Number:
    return f(t)


def limit_values(f: Piecewise, w: float) -> tuple[float, ...]:
    return f.limit_values(w)
