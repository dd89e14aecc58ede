"""Exact graded-commutative polynomial arithmetic.

A chart is an ordered tuple of graded coordinates.  Monomials are exponent
tuples in chart order; odd coordinates carry exponent 0 or 1.  Every sign is
a Koszul sign computed from integer degrees.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Iterator, Mapping, Sequence

Rat = Fraction
Monomial = tuple[int, ...]


class ChartMismatch(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class BiDegree:
    horizontal: int
    vertical: int

    @property
    def total(self) -> int:
        return self.horizontal + self.vertical


@dataclass(frozen=True)
class Coordinate:
    name: str
    degree: int


@dataclass(frozen=True)
class Chart:
    coordinates: tuple[Coordinate, ...]

    def __post_init__(self):
        names = [c.name for c in self.coordinates]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "Chart":
        return cls(tuple(Coordinate(n, int(d)) for n, d in pairs))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(c.degree for c in self.coordinates)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.coordinates)

    def __len__(self) -> int:
        return len(self.coordinates)

    def index(self, name: str) -> int:
        for i, c in enumerate(self.coordinates):
            if c.name == name:
                return i
        raise KeyError(name)

    def zero_monomial(self) -> Monomial:
        return (0,) * len(self.coordinates)

    def unit(self, i: int) -> Monomial:
        e = [0] * len(self.coordinates)
        e[i] = 1
        return tuple(e)


# ---------------------------------------------------------------------------
# signs, permutations, shuffles


def koszul_sign(sigma: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign k with x_1...x_n = k * x_sigma(1)...x_sigma(n).

    ``sigma`` holds 1-based images; ``degrees[i]`` is the degree of x_{i+1}.
    """
    n = len(sigma)
    if len(degrees) != n:
        raise ValueError("permutation and degree list differ in length")
    if sorted(sigma) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation: {sigma}")
    parity = 0
    for a in range(n):
        for b in range(a + 1, n):
            if sigma[a] > sigma[b]:
                parity += degrees[sigma[a] - 1] * degrees[sigma[b] - 1]
    return -1 if parity % 2 else 1


def compose_permutations(sigma: Sequence[int], tau: Sequence[int]) -> tuple[int, ...]:
    """(sigma o tau)(k) = sigma(tau(k))."""
    return tuple(sigma[t - 1] for t in tau)


def shuffles(p: int, q: int) -> list[tuple[int, ...]]:
    """All (p,q)-shuffles, ordered lexicographically by the first block."""
    if p < 0 or q < 0:
        raise ValueError("negative block size")
    n = p + q
    out = []
    for first in itertools.combinations(range(1, n + 1), p):
        rest = tuple(k for k in range(1, n + 1) if k not in first)
        out.append(first + rest)
    return out


def todd_like_coeffs(k_max: int) -> list[Fraction]:
    """Taylor coefficients of x/(1 - exp(-x)) up to x^k_max."""
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    # (1 - e^{-x})/x = sum_j (-1)^j x^j / (j+1)!
    d = [Fraction((-1) ** j, factorial(j + 1)) for j in range(k_max + 1)]
    beta: list[Fraction] = []
    for k in range(k_max + 1):
        s = sum((d[j] * beta[k - j] for j in range(1, k + 1)), Fraction(0))
        beta.append((Fraction(1 if k == 0 else 0) - s) / d[0])
    return beta


def binomial(n: int, k: int) -> int:
    return comb(n, k)


# ---------------------------------------------------------------------------
# monomials


def mono_degree(degrees: Sequence[int], a: Monomial) -> int:
    return sum(e * d for e, d in zip(a, degrees))


def mono_mul(degrees: Sequence[int], a: Monomial, b: Monomial) -> tuple[int, Monomial] | None:
    """x^a * x^b = sign * x^c, or None when an odd square appears."""
    sign_parity = 0
    c = []
    for i, (ai, bi, di) in enumerate(zip(a, b, degrees)):
        if di % 2 and ai + bi > 1:
            return None
        c.append(ai + bi)
    # move each factor of x^b left past the factors of x^a with larger index
    odd_a_suffix = 0
    for i in range(len(a) - 1, -1, -1):
        if degrees[i] % 2:
            if b[i]:
                sign_parity += odd_a_suffix
            if a[i]:
                odd_a_suffix += 1
    return (-1 if sign_parity % 2 else 1), tuple(c)


def mono_render(chart: Chart, a: Monomial) -> str:
    parts = []
    for c, e in zip(chart.coordinates, a):
        if e == 1:
            parts.append(c.name)
        elif e > 1:
            parts.append(f"{c.name}^{e}")
    return "*".join(parts)


def monomials_up_to(chart: Chart, max_total: int) -> Iterator[Monomial]:
    """All valid monomials with total exponent <= max_total."""
    ranges = [range(0, 2) if c.degree % 2 else range(0, max_total + 1) for c in chart.coordinates]
    for a in itertools.product(*ranges):
        if sum(a) <= max_total:
            yield tuple(a)


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """An element of the free graded-commutative algebra on a chart over Q."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[Monomial, Fraction] | None = None):
        self.chart = chart
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, v in terms.items():
                if v:
                    clean[m] = Fraction(v)
        self.terms = clean
        self._hash = None

    # constructors
    @classmethod
    def zero(cls, chart: Chart) -> "Poly":
        return cls(chart)

    @classmethod
    def const(cls, chart: Chart, value) -> "Poly":
        return cls(chart, {chart.zero_monomial(): Fraction(value)})

    @classmethod
    def var(cls, chart: Chart, name: str | int) -> "Poly":
        i = name if isinstance(name, int) else chart.index(name)
        return cls(chart, {chart.unit(i): Fraction(1)})

    @classmethod
    def monomial(cls, chart: Chart, a: Monomial, coeff=1) -> "Poly":
        return cls(chart, {tuple(a): Fraction(coeff)})

    # structure
    def _check(self, other: "Poly"):
        if self.chart != other.chart:
            raise ChartMismatch("polynomials live on different charts")

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def degrees(self) -> set[int]:
        return {mono_degree(self.chart.degrees, m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int:
        """Degree of a nonzero homogeneous polynomial (0 for the zero polynomial)."""
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError(f"inhomogeneous polynomial {self}")
        return ds.pop() if ds else 0

    def homogeneous_parts(self) -> dict[int, "Poly"]:
        parts: dict[int, dict] = {}
        for m, v in self.terms.items():
            parts.setdefault(mono_degree(self.chart.degrees, m), {})[m] = v
        return {d: Poly(self.chart, t) for d, t in parts.items()}

    def max_exponent_total(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.chart, other)
        self._check(other)
        t = dict(self.terms)
        for m, v in other.terms.items():
            t[m] = t.get(m, 0) + v
        return Poly(self.chart, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.chart, {m: -v for m, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        return Poly(self.chart, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Poly):
            return poly_mul(self, other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        out = Poly.const(self.chart, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.chart, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        return render_poly(self)


def poly_mul(a: Poly, b: Poly) -> Poly:
    """Graded-commutative product with Koszul reordering signs."""
    a._check(b)
    degs = a.chart.degrees
    out: dict[Monomial, Fraction] = {}
    for ma, va in a.terms.items():
        for mb, vb in b.terms.items():
            r = mono_mul(degs, ma, mb)
            if r is None:
                continue
            s, mc = r
            out[mc] = out.get(mc, 0) + s * va * vb
    return Poly(a.chart, out)


def _fmt_rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    pieces = []
    for m in sorted(p.terms, key=lambda m: (-sum(m), tuple(-e for e in m))):
        c = p.terms[m]
        body = mono_render(p.chart, m)
        mag = abs(c)
        if not body:
            term = _fmt_rat(mag)
        elif mag == 1:
            term = body
        else:
            term = f"{_fmt_rat(mag)}*{body}"
        pieces.append(("-" if c < 0 else "+", term))
    head_sign, head = pieces[0]
    out = ("-" if head_sign == "-" else "") + head
    for s, t in pieces[1:]:
        out += f" {s} {t}"
    return out


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S)")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    toks = []
    for m in _TOKEN.finditer(src):
        start = m.start()
        if m.group(1):
            toks.append(("int", m.group(1), start))
        elif m.group(2):
            toks.append(("ident", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*^/()":
                raise ParseError(f"unexpected character {ch!r}", start)
            toks.append((ch, ch, start))
    toks.append(("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str, chart: Chart):
        self.toks = _tokenize(src)
        self.i = 0
        self.chart = chart

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str | None = None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def expr(self) -> Poly:
        sign = 1
        if self.peek()[0] in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
        acc = self.term().scale(sign)
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Poly:
        acc = self.factor()
        while self.peek()[0] == "*":
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> Poly:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            n = int(self.take("int")[1])
            return base ** n
        return base

    def atom(self) -> Poly:
        kind, text, pos = self.peek()
        if kind == "int":
            self.take()
            num = int(text)
            if self.peek()[0] == "/":
                self.take()
                den = int(self.take("int")[1])
                if den == 0:
                    raise ParseError("zero denominator", pos)
                return Poly.const(self.chart, Fraction(num, den))
            return Poly.const(self.chart, num)
        if kind == "ident":
            self.take()
            try:
                return Poly.var(self.chart, text)
            except KeyError:
                raise ParseError(f"unknown identifier {text!r}", pos) from None
        if kind == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        raise ParseError(f"unexpected token {text or 'end of input'!r}", pos)


def parse_poly(src: str, chart: Chart) -> Poly:
    """Parse an expression over the chart's coordinate names into normal form.

    A leading sign is accepted at the start of every parenthesised expression.
    """
    p = _Parser(src, chart)
    out = p.expr()
    p.take("end")
    return out


def homogeneous_random_poly(chart: Chart, degree: int, rng, max_total: int = 4, max_terms: int = 3) -> Poly:
    """Random homogeneous polynomial of the given degree (zero if none exist)."""
    pool = [m for m in monomials_up_to(chart, max_total) if mono_degree(chart.degrees, m) == degree]
    if not pool:
        return Poly.zero(chart)
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        m = pool[rng.randrange(len(pool))]
        terms[m] = terms.get(m, 0) + Fraction(rng.randint(-3, 3) or 1)
    return Poly(chart, terms)


@lru_cache(maxsize=None)
def _degree_pool(chart: Chart, max_total: int) -> dict[int, tuple[Monomial, ...]]:
    pool: dict[int, list] = {}
    for m in monomials_up_to(chart, max_total):
        pool.setdefault(mono_degree(chart.degrees, m), []).append(m)
    return {d: tuple(v) for d, v in pool.items()}


def available_degrees(chart: Chart, max_total: int) -> list[int]:
    return sorted(_degree_pool(chart, max_total))


def monomials_of_degree(chart: Chart, degree: int, max_total: int) -> tuple[Monomial, ...]:
    return _degree_pool(chart, max_total).get(degree, ())


def sum_polys(chart: Chart, polys: Iterable[Poly]) -> Poly:
    t: dict[Monomial, Fraction] = {}
    for p in polys:
        for m, v in p.terms.items():
            t[m] = t.get(m, 0) + v
    return Poly(chart, t)
