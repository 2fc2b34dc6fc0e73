"""Exact function ring over chart models.

An element is a finite sum

    c * x1^a1 * ... * E(y1; k1) * ...

where the x's are affine coordinates carrying polynomial degrees a >= 0,
the y's are periodic (angle) coordinates carrying Fourier exponentials
E(y; k) = e^{i k y} with k integral, and each coefficient c is a Gaussian
rational.  The representation is a dict mapping one exponent tuple per
coordinate to its coefficient, with zero coefficients never stored, so
equality of dicts is equality in the ring.

The ring is closed under addition, multiplication, partial derivatives and
complex conjugation.  Evaluation is exact at points whose periodic
coordinates sit at quarter turns (integer multiples of pi/2), where
e^{i k y} lands in {1, i, -1, -i}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .errors import ChartMismatchError, ParseError, ValidationError

AFFINE = "affine"
PERIODIC = "periodic"

_RESERVED_NAMES = {"I", "E", "cos", "sin"}

RationalLike = Union[int, Fraction]


@dataclass(frozen=True)
class Chart:
    """An ordered list of named coordinates, each affine or periodic."""

    coords: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if len(self.coords) < 1:
            raise ValidationError("chart needs at least one coordinate")
        seen: set[str] = set()
        for name, kind in self.coords:
            if kind not in (AFFINE, PERIODIC):
                raise ValidationError(f"unknown coordinate kind {kind!r}")
            if not name.isidentifier() or name in _RESERVED_NAMES:
                raise ValidationError(f"bad coordinate name {name!r}")
            if name in seen:
                raise ValidationError(f"duplicate coordinate name {name!r}")
            seen.add(name)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.coords)

    def index(self, name: str) -> int:
        for i, (cname, _) in enumerate(self.coords):
            if cname == name:
                return i
        raise ValidationError(f"unknown coordinate {name!r}")

    def kind(self, i: int) -> str:
        return self.coords[i][1]

    def is_affine(self, i: int) -> bool:
        return self.coords[i][1] == AFFINE

    def __str__(self) -> str:
        return "(" + ", ".join(f"{n}:{k}" for n, k in self.coords) + ")"


def make_chart(*coords: tuple[str, str]) -> Chart:
    return Chart(tuple(coords))


def _as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise ValidationError(f"expected an exact rational, got {value!r}")
    return Fraction(value)


@dataclass(frozen=True)
class Scalar:
    """Gaussian rational a + b*I with exact Fraction parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(re: RationalLike = 0, im: RationalLike = 0) -> "Scalar":
        return Scalar(_as_fraction(re), _as_fraction(im))

    def __add__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "Scalar") -> "Scalar":
        return Scalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> "Scalar":
        return Scalar(-self.re, -self.im)

    def conj(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def inverse(self) -> "Scalar":
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise ZeroDivisionError("inverse of zero scalar")
        return Scalar(self.re / norm, -self.im / norm)

    def __truediv__(self, other: "Scalar") -> "Scalar":
        return self * other.inverse()

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero

    def __str__(self) -> str:
        return scalar_text(self)


ZERO = Scalar()
ONE = Scalar(Fraction(1), Fraction(0))
IMAG = Scalar(Fraction(0), Fraction(1))

# i^k for k mod 4, used by quarter-turn evaluation.
_I_POWERS = (ONE, IMAG, -ONE, -IMAG)


def quarter_phase(k: int) -> Scalar:
    """The exact value of e^{i k pi/2}."""
    return _I_POWERS[k % 4]


def scalar_text(s: Scalar) -> str:
    """Canonical text for a scalar, parseable by parse_expr."""

    def frac(q: Fraction) -> str:
        return str(q)

    if s.im == 0:
        return frac(s.re)
    if s.re == 0:
        if s.im == 1:
            return "I"
        if s.im == -1:
            return "-I"
        return f"{frac(s.im)}*I"
    imag = "I" if s.im == 1 else ("-I" if s.im == -1 else f"{frac(s.im)}*I")
    joiner = "" if imag.startswith("-") else "+"
    return f"({frac(s.re)}{joiner}{imag})"


@dataclass(frozen=True)
class EvalPoint:
    """A chart point: rationals on affine coordinates, integer quarter
    turns (value = q*pi/2) on periodic ones."""

    chart: Chart
    values: tuple[Union[Fraction, int], ...]

    @staticmethod
    def at(chart: Chart, **named: RationalLike) -> "EvalPoint":
        return EvalPoint.from_mapping(chart, named)

    @staticmethod
    def from_mapping(chart: Chart, named: Mapping[str, RationalLike]) -> "EvalPoint":
        extra = set(named) - set(chart.names)
        if extra:
            raise ValidationError(f"unknown coordinates in point: {sorted(extra)}")
        values: list[Union[Fraction, int]] = []
        for i, (name, kind) in enumerate(chart.coords):
            if name not in named:
                raise ValidationError(f"point is missing coordinate {name!r}")
            raw = named[name]
            if kind == PERIODIC:
                if isinstance(raw, bool) or not isinstance(raw, int):
                    raise ValidationError(
                        f"periodic coordinate {name!r} takes integer quarter turns"
                    )
                values.append(raw)
            else:
                values.append(_as_fraction(raw))
        return EvalPoint(chart, tuple(values))

    def value(self, name: str) -> Union[Fraction, int]:
        return self.values[self.chart.index(name)]

    def __str__(self) -> str:
        parts = [f"{n}={v}" for (n, _), v in zip(self.chart.coords, self.values)]
        return "(" + ", ".join(parts) + ")"


Exponent = tuple[int, ...]


def _check_chart(a: "RingElement", b: "RingElement") -> None:
    if a.chart != b.chart:
        raise ChartMismatchError(f"charts differ: {a.chart} vs {b.chart}")


class RingElement:
    """A canonical sparse sum of monomials over a fixed chart."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping[Exponent, Scalar]) -> None:
        clean: dict[Exponent, Scalar] = {}
        n = chart.dim
        for expo, coeff in terms.items():
            if len(expo) != n:
                raise ValidationError("exponent arity does not match chart")
            for i, e in enumerate(expo):
                if chart.is_affine(i) and e < 0:
                    raise ValidationError("negative degree on affine coordinate")
            if not coeff.is_zero:
                clean[expo] = coeff
        self.chart = chart
        self.terms = clean

    # --- constructors -------------------------------------------------

    @staticmethod
    def zero(chart: Chart) -> "RingElement":
        return RingElement(chart, {})

    @staticmethod
    def constant(chart: Chart, value: Scalar) -> "RingElement":
        return RingElement(chart, {(0,) * chart.dim: value})

    @staticmethod
    def one(chart: Chart) -> "RingElement":
        return RingElement.constant(chart, ONE)

    @staticmethod
    def coordinate(chart: Chart, name: str) -> "RingElement":
        i = chart.index(name)
        if not chart.is_affine(i):
            raise ValidationError(
                f"periodic coordinate {name!r} enters only through E({name}; k)"
            )
        expo = tuple(1 if j == i else 0 for j in range(chart.dim))
        return RingElement(chart, {expo: ONE})

    @staticmethod
    def fourier(chart: Chart, name: str, k: int) -> "RingElement":
        i = chart.index(name)
        if chart.is_affine(i):
            raise ValidationError(
                f"Fourier exponential needs a periodic coordinate, {name!r} is affine"
            )
        expo = tuple(k if j == i else 0 for j in range(chart.dim))
        return RingElement(chart, {expo: ONE})

    # --- ring operations ----------------------------------------------

    def __add__(self, other: "RingElement") -> "RingElement":
        _check_chart(self, other)
        out = dict(self.terms)
        for expo, coeff in other.terms.items():
            out[expo] = out.get(expo, ZERO) + coeff
        return RingElement(self.chart, out)

    def __sub__(self, other: "RingElement") -> "RingElement":
        return self + (-other)

    def __neg__(self) -> "RingElement":
        return RingElement(self.chart, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other: "RingElement") -> "RingElement":
        _check_chart(self, other)
        out: dict[Exponent, Scalar] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                expo = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                if expo in out:
                    out[expo] = out[expo] + prod
                else:
                    out[expo] = prod
        return RingElement(self.chart, out)

    def scale(self, s: Scalar) -> "RingElement":
        return RingElement(self.chart, {e: c * s for e, c in self.terms.items()})

    def __pow__(self, power: int) -> "RingElement":
        if power < 0:
            raise ValidationError("negative powers are not in the ring")
        out = RingElement.one(self.chart)
        base = self
        p = power
        while p:
            if p & 1:
                out = out * base
            base = base * base
            p >>= 1
        return out

    def conj(self) -> "RingElement":
        out: dict[Exponent, Scalar] = {}
        for expo, coeff in self.terms.items():
            flipped = tuple(
                -e if not self.chart.is_affine(i) else e for i, e in enumerate(expo)
            )
            out[flipped] = coeff.conj()
        return RingElement(self.chart, out)

    def partial(self, name: str) -> "RingElement":
        """Exact partial derivative in the named coordinate."""
        i = self.chart.index(name)
        out: dict[Exponent, Scalar] = {}
        affine = self.chart.is_affine(i)
        for expo, coeff in self.terms.items():
            e = expo[i]
            if affine:
                if e == 0:
                    continue
                dropped = tuple(v - 1 if j == i else v for j, v in enumerate(expo))
                add = coeff * Scalar.of(e)
            else:
                if e == 0:
                    continue
                dropped = expo
                add = coeff * Scalar.of(0, e)  # d/dy e^{iky} = i k e^{iky}
            if dropped in out:
                out[dropped] = out[dropped] + add
            else:
                out[dropped] = add
        return RingElement(self.chart, out)

    def evaluate(self, point: EvalPoint) -> Scalar:
        if point.chart != self.chart:
            raise ChartMismatchError("point lives on a different chart")
        total = ZERO
        for expo, coeff in self.terms.items():
            value = coeff
            for i, e in enumerate(expo):
                if e == 0:
                    continue
                if self.chart.is_affine(i):
                    base = point.values[i]
                    value = value * Scalar.of(Fraction(base) ** e)
                else:
                    q = point.values[i]
                    value = value * _I_POWERS[(e * q) % 4]
            total = total + value
        return total

    # --- predicates and text -------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_real(self) -> bool:
        return self == self.conj()

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in expo) for expo in self.terms)

    def constant_value(self) -> Scalar:
        if not self.is_constant():
            raise ValidationError("element is not constant")
        if self.is_zero:
            return ZERO
        return next(iter(self.terms.values()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    __hash__ = None  # type: ignore[assignment]

    def _term_text(self, expo: Exponent, coeff: Scalar) -> tuple[int, str]:
        factors: list[str] = []
        for i, e in enumerate(expo):
            if e == 0:
                continue
            name = self.chart.coords[i][0]
            if self.chart.is_affine(i):
                factors.append(name if e == 1 else f"{name}^{e}")
            else:
                factors.append(f"E({name};{e})")
        mono = "*".join(factors)
        if coeff.re != 0 and coeff.im != 0:
            body = scalar_text(coeff)
            return 1, f"{body}*{mono}" if mono else body
        if coeff.im == 0:
            sign = 1 if coeff.re > 0 else -1
            mag = abs(coeff.re)
            if not mono:
                return sign, str(mag)
            return sign, mono if mag == 1 else f"{mag}*{mono}"
        sign = 1 if coeff.im > 0 else -1
        mag = abs(coeff.im)
        head = "I" if mag == 1 else f"{mag}*I"
        return sign, f"{head}*{mono}" if mono else head

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces: list[tuple[int, str]] = []
        for expo in sorted(self.terms, reverse=True):
            pieces.append(self._term_text(expo, self.terms[expo]))
        sign, body = pieces[0]
        out = ("-" if sign < 0 else "") + body
        for sign, body in pieces[1:]:
            out += (" - " if sign < 0 else " + ") + body
        return out

    def __repr__(self) -> str:
        return f"<{self} over {self.chart}>"


# --- parser -----------------------------------------------------------


class _Tokens:
    """Hand lexer producing (kind, text, pos) triples."""

    def __init__(self, src: str) -> None:
        self.src = src
        self.pos = 0
        self.items: list[tuple[str, str, int]] = []
        self._lex()
        self.cursor = 0

    def _lex(self) -> None:
        src = self.src
        i = 0
        while i < len(src):
            ch = src[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit():
                j = i
                while j < len(src) and src[j].isdigit():
                    j += 1
                self.items.append(("num", src[i:j], i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < len(src) and (src[j].isalnum() or src[j] == "_"):
                    j += 1
                self.items.append(("ident", src[i:j], i))
                i = j
                continue
            if ch in "+-*^();/":
                self.items.append((ch, ch, i))
                i += 1
                continue
            raise ParseError(f"unexpected character {ch!r}", i)
        self.items.append(("end", "", len(src)))

    def peek(self) -> tuple[str, str, int]:
        return self.items[self.cursor]

    def take(self, kind: str | None = None) -> tuple[str, str, int]:
        item = self.items[self.cursor]
        if kind is not None and item[0] != kind:
            raise ParseError(f"expected {kind!r}, found {item[1]!r}", item[2])
        self.cursor += 1
        return item


def parse_expr(src: str, chart: Chart) -> RingElement:
    """Parse expression text into a canonical ring element.

    Grammar:
        expr   := ('+'|'-')? term (('+'|'-') term)*
        term   := factor ('*' factor)*
        factor := atom ('^' uint)?
        atom   := rational | 'I' | ident | 'E' '(' ident ';' int ')'
                | 'cos' '(' ident ')' | 'sin' '(' ident ')' | '(' expr ')'

    with rationals written p/q or as integers.  cos and sin expand into
    Fourier exponentials: cos(y) = (E(y;1)+E(y;-1))/2 and
    sin(y) = (E(y;1)-E(y;-1))/(2i).
    """
    toks = _Tokens(src)
    value = _parse_sum(toks, chart)
    kind, text, pos = toks.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing input {text!r}", pos)
    return value


def _parse_sum(toks: _Tokens, chart: Chart) -> RingElement:
    kind, _, _ = toks.peek()
    negate = False
    if kind in ("+", "-"):
        toks.take()
        negate = kind == "-"
    total = _parse_term(toks, chart)
    if negate:
        total = -total
    while True:
        kind, _, _ = toks.peek()
        if kind not in ("+", "-"):
            return total
        toks.take()
        rhs = _parse_term(toks, chart)
        total = total + rhs if kind == "+" else total - rhs


def _parse_term(toks: _Tokens, chart: Chart) -> RingElement:
    value = _parse_factor(toks, chart)
    while toks.peek()[0] == "*":
        toks.take()
        value = value * _parse_factor(toks, chart)
    return value


def _parse_factor(toks: _Tokens, chart: Chart) -> RingElement:
    value = _parse_atom(toks, chart)
    if toks.peek()[0] == "^":
        toks.take()
        kind, text, pos = toks.take()
        if kind != "num":
            raise ParseError("exponent must be a nonnegative integer", pos)
        value = value ** int(text)
    return value


def _parse_int(toks: _Tokens) -> int:
    sign = 1
    kind, _, _ = toks.peek()
    if kind in ("+", "-"):
        toks.take()
        sign = -1 if kind == "-" else 1
    _, text, _ = toks.take("num")
    return sign * int(text)


def _parse_atom(toks: _Tokens, chart: Chart) -> RingElement:
    kind, text, pos = toks.take()
    if kind == "num":
        numer = int(text)
        if toks.peek()[0] == "/":
            toks.take()
            _, dtext, dpos = toks.take("num")
            if int(dtext) == 0:
                raise ParseError("zero denominator", dpos)
            return RingElement.constant(chart, Scalar.of(Fraction(numer, int(dtext))))
        return RingElement.constant(chart, Scalar.of(numer))
    if kind == "(":
        inner = _parse_sum(toks, chart)
        toks.take(")")
        return inner
    if kind == "ident":
        if text == "I":
            return RingElement.constant(chart, IMAG)
        if text == "E":
            toks.take("(")
            _, name, npos = toks.take("ident")
            _require_periodic(chart, name, npos)
            toks.take(";")
            k = _parse_int(toks)
            toks.take(")")
            return RingElement.fourier(chart, name, k)
        if text in ("cos", "sin"):
            toks.take("(")
            _, name, npos = toks.take("ident")
            _require_periodic(chart, name, npos)
            toks.take(")")
            plus = RingElement.fourier(chart, name, 1)
            minus = RingElement.fourier(chart, name, -1)
            if text == "cos":
                return (plus + minus).scale(Scalar.of(Fraction(1, 2)))
            return (plus - minus).scale(Scalar.of(0, Fraction(-1, 2)))
        if text in chart.names:
            i = chart.index(text)
            if not chart.is_affine(i):
                raise ParseError(
                    f"periodic coordinate {text!r} cannot carry a polynomial degree; "
                    f"use E({text}; k), cos({text}) or sin({text})",
                    pos,
                )
            return RingElement.coordinate(chart, text)
        raise ParseError(f"unknown coordinate {text!r}", pos)
    raise ParseError(f"unexpected token {text!r}", pos)


def _require_periodic(chart: Chart, name: str, pos: int) -> None:
    if name not in chart.names:
        raise ParseError(f"unknown coordinate {name!r}", pos)
    if chart.is_affine(chart.index(name)):
        raise ParseError(f"coordinate {name!r} is affine, not periodic", pos)
