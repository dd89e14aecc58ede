"""Vector fields and differential operators on a graded chart.

A ``DiffOp`` is stored in normal form as a map ``(A, B) -> c`` meaning the
sum of ``c * x^A * d^B``: coefficients on the left, derivative monomials on
the right.  ``d^B`` is the ordered product d_1^{b_1} d_2^{b_2} ... and acts by
applying the rightmost factor first.  Derivations act from the left.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .graded_algebra import (
    Chart,
    ChartMismatch,
    Monomial,
    Poly,
    mono_degree,
    mono_mul,
    mono_render,
    _fmt_rat,
)

DerMonomial = tuple[int, ...]
Term = tuple[Monomial, DerMonomial]


class PreconditionError(ValueError):
    pass


def der_degree(degrees: Sequence[int], b: DerMonomial) -> int:
    return -mono_degree(degrees, b)


def der_order(b: DerMonomial) -> int:
    return sum(b)


def der_render(chart: Chart, b: DerMonomial) -> str:
    parts = []
    for c, e in zip(chart.coordinates, b):
        if e == 1:
            parts.append(f"d_{c.name}")
        elif e > 1:
            parts.append(f"d_{c.name}^{e}")
    return "*".join(parts)


# ---------------------------------------------------------------------------
# elementary actions (cached on the degree vector)


def _unit(n: int, i: int) -> tuple[int, ...]:
    e = [0] * n
    e[i] = 1
    return tuple(e)


@lru_cache(maxsize=None)
def partial_on_monomial(degrees: tuple[int, ...], i: int, a: Monomial) -> tuple[int, Monomial] | None:
    """d_i x^a = coeff * x^{a - e_i}, or None when a_i = 0."""
    if a[i] == 0:
        return None
    before = sum(a[j] * degrees[j] for j in range(i))
    sign = -1 if (degrees[i] * before) % 2 else 1
    b = list(a)
    b[i] -= 1
    return sign * a[i], tuple(b)


@lru_cache(maxsize=None)
def der_on_monomial(degrees: tuple[int, ...], b: DerMonomial, a: Monomial) -> tuple[int, Monomial] | None:
    """d^b x^a as coeff * x^c (rightmost derivative factor acts first)."""
    coeff = 1
    cur = a
    for i in range(len(b) - 1, -1, -1):
        for _ in range(b[i]):
            r = partial_on_monomial(degrees, i, cur)
            if r is None:
                return None
            coeff *= r[0]
            cur = r[1]
    return coeff, cur


@lru_cache(maxsize=None)
def der_times_mono(degrees: tuple[int, ...], b: DerMonomial, c: Monomial) -> tuple[tuple[Term, int], ...]:
    """Normal form of the composite d^b o x^c as ((x-exponent, d-exponent), coeff) pairs."""
    n = len(degrees)
    if not any(b):
        return (((c, (0,) * n), 1),)
    i = next(k for k in range(n) if b[k])
    rest = list(b)
    rest[i] -= 1
    rest = tuple(rest)
    lead = mono_mul(degrees, _unit(n, i), rest)
    s0, _ = lead  # d^b = s0 * d_i d^rest
    out: dict[Term, int] = {}
    for (c2, b2), k in der_times_mono(degrees, rest, c):
        r = partial_on_monomial(degrees, i, c2)
        if r is not None:
            key = (r[1], b2)
            out[key] = out.get(key, 0) + s0 * k * r[0]
        m = mono_mul(degrees, _unit(n, i), b2)
        if m is not None:
            sgn = -1 if (degrees[i] * mono_degree(degrees, c2)) % 2 else 1
            key = (c2, m[1])
            out[key] = out.get(key, 0) + s0 * k * sgn * m[0]
    return tuple((t, v) for t, v in out.items() if v)


def apply_der(chart: Chart, b: DerMonomial, f: Poly) -> Poly:
    degs = chart.degrees
    out: dict[Monomial, Fraction] = {}
    for a, v in f.terms.items():
        r = der_on_monomial(degs, b, a)
        if r is not None:
            out[r[1]] = out.get(r[1], 0) + r[0] * v
    return Poly(chart, out)


# ---------------------------------------------------------------------------
# differential operators


class DiffOp:
    """A differential operator sum c * x^A d^B in normal form."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[Term, Fraction] | None = None):
        self.chart = chart
        self.terms: dict[Term, Fraction] = {k: Fraction(v) for k, v in (terms or {}).items() if v}
        self._hash = None

    @classmethod
    def zero(cls, chart: Chart) -> "DiffOp":
        return cls(chart)

    @classmethod
    def identity(cls, chart: Chart) -> "DiffOp":
        z = chart.zero_monomial()
        return cls(chart, {(z, z): 1})

    @classmethod
    def multiplication(cls, f: Poly) -> "DiffOp":
        """The order-zero operator f*id."""
        z = f.chart.zero_monomial()
        return cls(f.chart, {(a, z): v for a, v in f.terms.items()})

    @classmethod
    def partial(cls, chart: Chart, i: int | str, power: int = 1) -> "DiffOp":
        if isinstance(i, str):
            i = chart.index(i)
        b = [0] * len(chart)
        b[i] = power
        if chart.degrees[i] % 2 and power > 1:
            return cls(chart)
        return cls(chart, {(chart.zero_monomial(), tuple(b)): 1})

    @classmethod
    def term(cls, chart: Chart, a: Monomial, b: DerMonomial, coeff=1) -> "DiffOp":
        return cls(chart, {(tuple(a), tuple(b)): coeff})

    def _check(self, other: "DiffOp"):
        if self.chart != other.chart:
            raise ChartMismatch("operators live on different charts")

    # gradings
    def term_degree(self, t: Term) -> int:
        degs = self.chart.degrees
        return mono_degree(degs, t[0]) + der_degree(degs, t[1])

    def degrees(self) -> set[int]:
        return {self.term_degree(t) for t in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError("inhomogeneous operator")
        return ds.pop() if ds else 0

    def homogeneous_parts(self) -> dict[int, "DiffOp"]:
        parts: dict[int, dict] = {}
        for t, v in self.terms.items():
            parts.setdefault(self.term_degree(t), {})[t] = v
        return {d: DiffOp(self.chart, p) for d, p in parts.items()}

    @property
    def order(self) -> int:
        return max((der_order(b) for _, b in self.terms), default=0)

    # linear structure
    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return DiffOp(self.chart, t)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.chart, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def scale(self, c) -> "DiffOp":
        c = Fraction(c)
        return DiffOp(self.chart, {k: c * v for k, v in self.terms.items()})

    def __rmul__(self, other):
        if isinstance(other, Poly):
            return left_multiply(other, self)
        return self.scale(other)

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return compose(self, other)
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, f: Poly) -> Poly:
        return apply(self, f)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for (a, b), v in sorted(self.terms.items()):
            body = "*".join(p for p in (mono_render(self.chart, a), der_render(self.chart, b)) if p) or "id"
            out.append(f"{'-' if v < 0 else '+'} {_fmt_rat(abs(v))}*{body}")
        s = " ".join(out)
        return s[2:] if s.startswith("+ ") else s

    __repr__ = __str__


def apply(d: DiffOp, f: Poly) -> Poly:
    """Evaluate d on f."""
    if d.chart != f.chart:
        raise ChartMismatch("operator and function live on different charts")
    degs = d.chart.degrees
    out: dict[Monomial, Fraction] = {}
    for (a, b), v in d.terms.items():
        for m, w in f.terms.items():
            r = der_on_monomial(degs, b, m)
            if r is None:
                continue
            p = mono_mul(degs, a, r[1])
            if p is None:
                continue
            out[p[1]] = out.get(p[1], 0) + p[0] * r[0] * v * w
    return Poly(d.chart, out)


def left_multiply(f: Poly, d: DiffOp) -> DiffOp:
    """The operator f*d."""
    if f.chart != d.chart:
        raise ChartMismatch("function and operator live on different charts")
    degs = d.chart.degrees
    out: dict[Term, Fraction] = {}
    for c, w in f.terms.items():
        for (a, b), v in d.terms.items():
            p = mono_mul(degs, c, a)
            if p is None:
                continue
            k = (p[1], b)
            out[k] = out.get(k, 0) + p[0] * w * v
    return DiffOp(d.chart, out)


def compose(d: DiffOp, e: DiffOp) -> DiffOp:
    """Normal form of d o e."""
    d._check(e)
    degs = d.chart.degrees
    out: dict[Term, Fraction] = {}
    for (a, b), v in d.terms.items():
        for (c, eb), w in e.terms.items():
            for (c2, b2), k in der_times_mono(degs, b, c):
                p = mono_mul(degs, a, c2)
                if p is None:
                    continue
                q = mono_mul(degs, b2, eb)
                if q is None:
                    continue
                key = (p[1], q[1])
                out[key] = out.get(key, 0) + p[0] * q[0] * k * v * w
    return DiffOp(d.chart, out)


def commutator(d: DiffOp, e: DiffOp) -> DiffOp:
    """Graded commutator d o e - (-1)^{|d||e|} e o d, split over homogeneous parts."""
    out = DiffOp.zero(d.chart)
    for p, dp in d.homogeneous_parts().items():
        for q, eq in e.homogeneous_parts().items():
            term = compose(dp, eq)
            other = compose(eq, dp)
            out = out + (term - other if (p * q) % 2 == 0 else term + other)
    return out


# ---------------------------------------------------------------------------
# vector fields


@dataclass(frozen=True)
class VectorField:
    """X = sum_i X^i d_i with X^i the component on d_i."""

    chart: Chart
    components: tuple[Poly, ...]

    def __post_init__(self):
        if len(self.components) != len(self.chart):
            raise ValueError("one component per coordinate required")
        for c in self.components:
            if c.chart != self.chart:
                raise ChartMismatch("component on a different chart")

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, tuple(Poly.zero(chart) for _ in chart.coordinates))

    @classmethod
    def from_dict(cls, chart: Chart, comps: Mapping[str | int, Poly]) -> "VectorField":
        out = [Poly.zero(chart) for _ in chart.coordinates]
        for k, v in comps.items():
            i = k if isinstance(k, int) else chart.index(k)
            out[i] = out[i] + v
        return cls(chart, tuple(out))

    @classmethod
    def coordinate(cls, chart: Chart, i: int | str) -> "VectorField":
        if isinstance(i, str):
            i = chart.index(i)
        return cls.from_dict(chart, {i: Poly.const(chart, 1)})

    @classmethod
    def from_diffop(cls, d: DiffOp) -> "VectorField":
        comps: dict[int, dict] = {}
        for (a, b), v in d.terms.items():
            if sum(b) != 1:
                raise ValueError("operator is not a derivation")
            i = b.index(1)
            comps.setdefault(i, {})[a] = v
        return cls.from_dict(d.chart, {i: Poly(d.chart, t) for i, t in comps.items()})

    def as_diffop(self) -> DiffOp:
        n = len(self.chart)
        terms: dict[Term, Fraction] = {}
        for i, comp in enumerate(self.components):
            for a, v in comp.terms.items():
                terms[(a, _unit(n, i))] = v
        return DiffOp(self.chart, terms)

    def degrees(self) -> set[int]:
        degs = self.chart.degrees
        out = set()
        for i, comp in enumerate(self.components):
            for d in comp.degrees():
                out.add(d - degs[i])
        return out

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError("inhomogeneous vector field")
        return ds.pop() if ds else 0

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.chart, tuple(a + b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, tuple(-a for a in self.components))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def scale(self, c) -> "VectorField":
        return VectorField(self.chart, tuple(a.scale(c) for a in self.components))

    def __rmul__(self, f):
        """f * X for a function or scalar f."""
        if isinstance(f, Poly):
            return VectorField(self.chart, tuple(f * a for a in self.components))
        return self.scale(f)

    def __call__(self, f: Poly) -> Poly:
        return apply(self.as_diffop(), f)

    def __str__(self):
        return str(self.as_diffop())

    __repr__ = __str__


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """[X,Y] = X o Y - (-1)^{|X||Y|} Y o X."""
    if x.chart != y.chart:
        raise ChartMismatch("vector fields live on different charts")
    return VectorField.from_diffop(commutator(x.as_diffop(), y.as_diffop()))


class HomologicalField:
    """A degree +1 vector field Q with [Q,Q] = 0."""

    def __init__(self, field: VectorField):
        if not check_homological(field):
            raise PreconditionError(f"[Q,Q] != 0 for Q = {field}")
        self.field = field
        self.chart = field.chart
        self._op = field.as_diffop()

    def as_diffop(self) -> DiffOp:
        return self._op

    def __call__(self, f: Poly) -> Poly:
        return apply(self._op, f)


def check_homological(x: VectorField) -> bool:
    if not x.is_zero() and x.degrees() != {1}:
        raise PreconditionError("a homological vector field must have degree +1")
    return lie_bracket(x, x).is_zero()


def L_Q(q: HomologicalField | VectorField, d: DiffOp) -> DiffOp:
    """[Q, D] = Q o D - (-1)^{|D|} D o Q."""
    qd = q.as_diffop()
    return commutator(qd, d)


# ---------------------------------------------------------------------------
# order <= 1 operators and the bimodule structure


@dataclass(frozen=True)
class FirstOrderOp:
    vector_part: VectorField
    scalar_part: Poly

    @property
    def chart(self) -> Chart:
        return self.vector_part.chart

    def as_diffop(self) -> DiffOp:
        return self.vector_part.as_diffop() + DiffOp.multiplication(self.scalar_part)

    @classmethod
    def from_diffop(cls, d: DiffOp) -> "FirstOrderOp":
        vec = {k: v for k, v in d.terms.items() if sum(k[1]) == 1}
        sca = {k[0]: v for k, v in d.terms.items() if sum(k[1]) == 0}
        if len(vec) + len(sca) != len(d.terms):
            raise ValueError("operator has order > 1")
        return cls(VectorField.from_diffop(DiffOp(d.chart, vec)), Poly(d.chart, sca))

    def __add__(self, other: "FirstOrderOp") -> "FirstOrderOp":
        return FirstOrderOp(self.vector_part + other.vector_part, self.scalar_part + other.scalar_part)


def bimodule_left(f: Poly, d: FirstOrderOp) -> FirstOrderOp:
    return FirstOrderOp(f * d.vector_part, f * d.scalar_part)


def bimodule_right(d: FirstOrderOp, f: Poly) -> FirstOrderOp:
    """(X + g) . f = (-1)^{|f||X|} f X + X(f) + g f."""
    chart = d.chart
    vec = VectorField.zero(chart)
    sca = d.scalar_part * f
    for p, fp in f.homogeneous_parts().items():
        x = d.vector_part
        for q, xq in _vf_homogeneous_parts(x).items():
            sign = -1 if (p * q) % 2 else 1
            vec = vec + (fp * xq).scale(sign)
            sca = sca + xq(fp)
    return FirstOrderOp(vec, sca)


def _vf_homogeneous_parts(x: VectorField) -> dict[int, VectorField]:
    return {d: VectorField.from_diffop(op) for d, op in x.as_diffop().homogeneous_parts().items()}


def vf_homogeneous_parts(x: VectorField) -> dict[int, VectorField]:
    return _vf_homogeneous_parts(x)
