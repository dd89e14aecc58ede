"""Polyvector fields and polydifferential operators.

A ``PolyDiffOp`` is stored as ``(A, (B_1, ..., B_n)) -> c`` meaning
``c * x^A * (d^{B_1} (x) ... (x) d^{B_n})``: one coefficient on the far left,
which is how ``f (D_1 (x) D_2) = (f D_1) (x) D_2`` lets every element be
written.  Arity 0 is ``(A, ())``, a plain function.  Total degree of a term is
``n + |x^A| + sum |d^{B_i}|``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Mapping, Sequence

from .derivations import (
    DerMonomial,
    DiffOp,
    HomologicalField,
    VectorField,
    compose,
    der_degree,
    der_on_monomial,
    der_render,
)
from .graded_algebra import (
    Chart,
    ChartMismatch,
    Monomial,
    Poly,
    _fmt_rat,
    koszul_sign,
    mono_degree,
    mono_mul,
    mono_render,
    shuffles,
)
from .hopf import WordAlgebra

PTerm = tuple[Monomial, tuple[DerMonomial, ...]]


class ArityError(ValueError):
    pass


def _acc(out: dict, key, value):
    v = out.get(key, 0) + value
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def _sgn(parity: int) -> int:
    return -1 if parity % 2 else 1


class PolyDiffOp:
    """An element of D_poly, possibly spread over several arities."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[PTerm, Fraction] | None = None):
        self.chart = chart
        self.terms: dict[PTerm, Fraction] = {k: Fraction(v) for k, v in (terms or {}).items() if v}
        self._hash = None

    # constructors ------------------------------------------------------------
    @classmethod
    def zero(cls, chart: Chart) -> "PolyDiffOp":
        return cls(chart)

    @classmethod
    def from_function(cls, f: Poly) -> "PolyDiffOp":
        return cls(f.chart, {(a, ()): v for a, v in f.terms.items()})

    @classmethod
    def from_diffop(cls, d: DiffOp) -> "PolyDiffOp":
        return cls(d.chart, {(a, (b,)): v for (a, b), v in d.terms.items()})

    @classmethod
    def from_vector_field(cls, x: VectorField) -> "PolyDiffOp":
        return cls.from_diffop(x.as_diffop())

    @classmethod
    def identity(cls, chart: Chart) -> "PolyDiffOp":
        return cls.from_diffop(DiffOp.identity(chart))

    @classmethod
    def multiplication(cls, chart: Chart) -> "PolyDiffOp":
        """m = -id (x) id."""
        z = chart.zero_monomial()
        return cls(chart, {(z, (z, z)): -1})

    @classmethod
    def tensor(cls, *factors: DiffOp) -> "PolyDiffOp":
        if not factors:
            raise ArityError("tensor of no factors; use from_function for arity 0")
        out = cls.from_diffop(factors[0])
        for f in factors[1:]:
            out = cup(out, cls.from_diffop(f))
        return out

    # structure ---------------------------------------------------------------
    def _check(self, other: "PolyDiffOp"):
        if self.chart != other.chart:
            raise ChartMismatch("polydifferential operators live on different charts")

    def term_degree(self, t: PTerm) -> int:
        degs = self.chart.degrees
        a, bs = t
        return len(bs) + mono_degree(degs, a) + sum(der_degree(degs, b) for b in bs)

    def term_bidegree(self, t: PTerm) -> tuple[int, int]:
        n = len(t[1])
        return n, self.term_degree(t) - n

    def arities(self) -> set[int]:
        return {len(bs) for _, bs in self.terms}

    def arity_part(self, n: int) -> "PolyDiffOp":
        return PolyDiffOp(self.chart, {k: v for k, v in self.terms.items() if len(k[1]) == n})

    def degrees(self) -> set[int]:
        return {self.term_degree(t) for t in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError("inhomogeneous polydifferential operator")
        return ds.pop() if ds else 0

    def homogeneous_parts(self) -> dict[int, "PolyDiffOp"]:
        parts: dict[int, dict] = {}
        for t, v in self.terms.items():
            parts.setdefault(self.term_degree(t), {})[t] = v
        return {d: PolyDiffOp(self.chart, p) for d, p in parts.items()}

    def is_zero(self) -> bool:
        return not self.terms

    def as_diffop(self) -> DiffOp:
        if self.arities() - {1}:
            raise ArityError("not an arity-1 element")
        return DiffOp(self.chart, {(a, bs[0]): v for (a, bs), v in self.terms.items()})

    def as_function(self) -> Poly:
        if self.arities() - {0}:
            raise ArityError("not an arity-0 element")
        return Poly(self.chart, {a: v for (a, _), v in self.terms.items()})

    # linear structure --------------------------------------------------------
    def __add__(self, other: "PolyDiffOp") -> "PolyDiffOp":
        self._check(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            _acc(t, k, v)
        return PolyDiffOp(self.chart, t)

    def __neg__(self) -> "PolyDiffOp":
        return PolyDiffOp(self.chart, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "PolyDiffOp") -> "PolyDiffOp":
        return self + (-other)

    def scale(self, c) -> "PolyDiffOp":
        c = Fraction(c)
        return PolyDiffOp(self.chart, {k: c * v for k, v in self.terms.items()})

    def __rmul__(self, other):
        if isinstance(other, Poly):
            return cup(PolyDiffOp.from_function(other), self)
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self.terms.items())))
        return self._hash

    def __call__(self, *args: Poly) -> Poly:
        return evaluate(self, list(args))

    def __str__(self):
        return render_polydiffop(self)

    __repr__ = __str__


def render_polydiffop(p: PolyDiffOp) -> str:
    if not p.terms:
        return "0"
    out = []
    for (a, bs), v in sorted(p.terms.items(), key=lambda kv: (len(kv[0][1]), kv[0])):
        coef = mono_render(p.chart, a)
        body = " (x) ".join(der_render(p.chart, b) or "id" for b in bs) if bs else ""
        pieces = [_fmt_rat(abs(v))] + [s for s in (coef,) if s]
        head = "*".join(pieces)
        term = f"{head}*[{body}]" if bs else head
        out.append(("-" if v < 0 else "+") + " " + term)
    s = " ".join(out)
    return s[2:] if s.startswith("+ ") else s


# ---------------------------------------------------------------------------
# evaluation, cup product


def _eval_sign(degs, bs, parities) -> int:
    """(-1)^star with star = sum_{i<j} (f_i + 1) |D_j|, |D_j| = 1 + |d^{B_j}| for j >= 2."""
    par = 0
    acc = 0
    for j, b in enumerate(bs):
        if j > 0:
            par += acc * (1 + der_degree(degs, b))
        acc += parities[j] + 1
    return _sgn(par)


def evaluate(d: PolyDiffOp, args: Sequence[Poly]) -> Poly:
    """D(f_1, ..., f_n) with the Tamarkin-Tsygan sign; arity mismatch raises."""
    chart = d.chart
    degs = chart.degrees
    n = len(args)
    if d.arities() - {n}:
        raise ArityError(f"operator arities {sorted(d.arities())} do not match {n} arguments")
    for f in args:
        if f.chart != chart:
            raise ChartMismatch("argument on a different chart")
    split = [list(f.homogeneous_parts().items()) for f in args]
    out: dict[Monomial, Fraction] = {}
    for (a, bs), c in d.terms.items():
        for combo in itertools.product(*split):
            parities = [p for p, _ in combo]
            sign = _eval_sign(degs, bs, parities)
            # product x^A * d^{B_1} f_1 * ... * d^{B_n} f_n, accumulated monomial-wise
            partial: dict[Monomial, Fraction] = {a: Fraction(sign) * c}
            for b, (_, f) in zip(bs, combo):
                nxt: dict[Monomial, Fraction] = {}
                for m, v in partial.items():
                    for fm, fv in f.terms.items():
                        r = der_on_monomial(degs, b, fm)
                        if r is None:
                            continue
                        mm = mono_mul(degs, m, r[1])
                        if mm is None:
                            continue
                        _acc(nxt, mm[1], v * fv * r[0] * mm[0])
                partial = nxt
                if not partial:
                    break
            for m, v in partial.items():
                _acc(out, m, v)
    return Poly(chart, out)


def _word_degree(degs, bs) -> int:
    return sum(1 + der_degree(degs, b) for b in bs)


def cup(d: PolyDiffOp, e: PolyDiffOp) -> PolyDiffOp:
    """D (x) E in normal form."""
    d._check(e)
    degs = d.chart.degrees
    out: dict[PTerm, Fraction] = {}
    for (a, bs), v in d.terms.items():
        wd = _word_degree(degs, bs)
        for (c, es), w in e.terms.items():
            m = mono_mul(degs, a, c)
            if m is None:
                continue
            sign = m[0] * _sgn(mono_degree(degs, c) * wd)
            _acc(out, (m[1], bs + es), sign * v * w)
    return PolyDiffOp(d.chart, out)


def permute(d: PolyDiffOp, sigma: Sequence[int]) -> PolyDiffOp:
    """Symmetric-group action D_1...D_n -> kappa(sigma) D_sigma(1)...D_sigma(n) (total degrees)."""
    degs = d.chart.degrees
    out: dict[PTerm, Fraction] = {}
    for (a, bs), v in d.terms.items():
        if len(bs) != len(sigma):
            raise ArityError("permutation size differs from arity")
        k = koszul_sign(sigma, [1 + der_degree(degs, b) for b in bs])
        _acc(out, (a, tuple(bs[s - 1] for s in sigma)), k * v)
    return PolyDiffOp(d.chart, out)


# ---------------------------------------------------------------------------
# coproduct


@lru_cache(maxsize=None)
def leibniz_table(degrees: tuple[int, ...], b: DerMonomial) -> tuple[tuple[tuple[DerMonomial, DerMonomial], int], ...]:
    """c(B1, B2) with d^B(f g) = sum c (-1)^{|B2||f|} d^{B1} f d^{B2} g."""
    n = len(degrees)
    z = (0,) * n
    if not any(b):
        return (((z, z), 1),)
    i = next(k for k in range(n) if b[k])
    rest = list(b)
    rest[i] -= 1
    rest = tuple(rest)
    e_i = tuple(1 if k == i else 0 for k in range(n))
    s0 = mono_mul(degrees, e_i, rest)[0]
    out: dict = {}
    for (b1, b2), c in leibniz_table(degrees, rest):
        m1 = mono_mul(degrees, e_i, b1)
        if m1 is not None:
            _acc(out, (m1[1], b2), s0 * c * m1[0])
        m2 = mono_mul(degrees, e_i, b2)
        if m2 is not None:
            sign = _sgn(degrees[i] * mono_degree(degrees, b1))
            _acc(out, (b1, m2[1]), s0 * c * m2[0] * sign)
    return tuple(out.items())


@lru_cache(maxsize=None)
def multi_leibniz_table(degrees: tuple[int, ...], b: DerMonomial, k: int):
    """d^B(u_0 ... u_{k-1}) = sum c (-1)^{sum_{i<j} |F_j||u_i|} prod d^{F_j} u_j."""
    if k == 1:
        return (((b,), 1),)
    out: dict = {}
    for (b0, r), c in leibniz_table(degrees, b):
        for fs, c2 in multi_leibniz_table(degrees, r, k - 1):
            _acc(out, (b0,) + fs, c * c2)
    return tuple(out.items())


def _delta_term(degs, a, b) -> dict:
    out: dict = {}
    for (b1, b2), c in leibniz_table(degs, b):
        _acc(out, (a, (b1, b2)), c * _sgn(der_degree(degs, b2)))
    return out


def coproduct_delta(d: DiffOp | PolyDiffOp) -> PolyDiffOp:
    """The coproduct of an arity-1 operator: Delta(D)(f, g) = (-1)^{|f|+1} D(f g)."""
    if isinstance(d, PolyDiffOp):
        d = d.as_diffop()
    degs = d.chart.degrees
    out: dict = {}
    for (a, b), v in d.terms.items():
        for k, c in _delta_term(degs, a, b).items():
            _acc(out, k, c * v)
    return PolyDiffOp(d.chart, out)


# ---------------------------------------------------------------------------
# Hochschild differential, explicit formula


def hochschild_d(d: PolyDiffOp) -> PolyDiffOp:
    degs = d.chart.degrees
    z = d.chart.zero_monomial()
    out: dict = {}
    for (a, bs), v in d.terms.items():
        n = len(bs)
        if n == 0:
            continue
        da = mono_degree(degs, a)
        sizes = [1 + der_degree(degs, b) for b in bs]
        sizes[0] += da
        total = sum(sizes)
        pre = _sgn(total)
        _acc(out, (a, bs + (z,)), pre * v)
        for i in range(n):
            tail = sum(sizes[i + 1:])
            for (b1, b2), c in leibniz_table(degs, bs[i]):
                coef = c * _sgn(der_degree(degs, b2))
                _acc(out, (a, bs[:i] + (b1, b2) + bs[i + 1:]), -pre * _sgn(tail) * coef * v)
        _acc(out, (a, (z,) + bs), -pre * _sgn(total) * _sgn(da) * v)
    return PolyDiffOp(d.chart, out)


# ---------------------------------------------------------------------------
# Gerstenhaber product and bracket


def _naive_sign(degs, bs) -> int:
    """Normal-form coefficient = naive coefficient * this sign (all inputs even)."""
    return _sgn(sum(j * (1 + der_degree(degs, b)) for j, b in enumerate(bs)))


def _product_terms(degs, dterm, kd, eterm, ke, out):
    a, bs = dterm
    c, es = eterm
    n, m = len(bs), len(es)
    dc = mono_degree(degs, c)
    e_vert = dc + sum(der_degree(degs, e) for e in es)
    e_total = m + e_vert
    nu_e = ke * _naive_sign(degs, es)
    u_par = (dc,) + tuple(der_degree(degs, e) for e in es)
    for j in range(n):
        sign_j = _sgn((e_total + 1) * j)
        parities = [0] * n
        parities[j] = e_vert
        sign_d = _eval_sign(degs, bs, parities)
        before = sum(der_degree(degs, b) for b in bs[:j])
        for fs, lam in multi_leibniz_table(degs, bs[j], m + 1):
            par = 0
            for l in range(1, m + 1):
                par += der_degree(degs, fs[l]) * sum(u_par[:l])
            coeff = lam * _sgn(par)
            r = der_on_monomial(degs, fs[0], c)
            if r is None:
                continue
            coeff *= r[0]
            c2 = r[1]
            gs = []
            ok = True
            for l in range(m):
                mm = mono_mul(degs, fs[l + 1], es[l])
                if mm is None:
                    ok = False
                    break
                coeff *= mm[0]
                gs.append(mm[1])
            if not ok:
                continue
            coeff *= _sgn(mono_degree(degs, c2) * before)
            ac = mono_mul(degs, a, c2)
            if ac is None:
                continue
            coeff *= ac[0]
            new_bs = bs[:j] + tuple(gs) + bs[j + 1:]
            val = kd * sign_j * sign_d * nu_e * coeff * _naive_sign(degs, new_bs)
            _acc(out, (ac[1], new_bs), val)


def gerstenhaber_product(d: PolyDiffOp, e: PolyDiffOp) -> PolyDiffOp:
    """D o E; every arity of D must be at least 1."""
    d._check(e)
    if 0 in d.arities():
        raise ArityError("the left factor of the Gerstenhaber product needs arity >= 1")
    return _product(d, e)


def _product(d: PolyDiffOp, e: PolyDiffOp) -> PolyDiffOp:
    degs = d.chart.degrees
    out: dict = {}
    for dt, kd in d.terms.items():
        if not dt[1]:
            continue  # f o E := 0 inside the bracket
        for et, ke in e.terms.items():
            _product_terms(degs, dt, kd, et, ke, out)
    return PolyDiffOp(d.chart, out)


def gerstenhaber_bracket(d: PolyDiffOp, e: PolyDiffOp) -> PolyDiffOp:
    """[D, E] = D o E - (-1)^{(|D|+1)(|E|+1)} E o D; arity-0 left factors contribute 0."""
    d._check(e)
    out = PolyDiffOp.zero(d.chart)
    for p, dp in d.homogeneous_parts().items():
        for q, eq in e.homogeneous_parts().items():
            s = _sgn((p + 1) * (q + 1))
            out = out + _product(dp, eq) - _product(eq, dp).scale(s)
    return out


def hochschild_d_via_m(d: PolyDiffOp) -> PolyDiffOp:
    return gerstenhaber_bracket(PolyDiffOp.multiplication(d.chart), d)


def L_Q(q: HomologicalField | VectorField, d: PolyDiffOp) -> PolyDiffOp:
    """L_Q = [Q, .] with the Gerstenhaber bracket."""
    qf = q.field if isinstance(q, HomologicalField) else q
    return gerstenhaber_bracket(PolyDiffOp.from_vector_field(qf), d)


# ---------------------------------------------------------------------------
# canonical bracket and the closed coproduct formula


def free_bracket(d: PolyDiffOp, e: PolyDiffOp) -> PolyDiffOp:
    """[[D, E]] = D (x) E - (-1)^{|D||E|} E (x) D, bilinear over homogeneous parts."""
    out = PolyDiffOp.zero(d.chart)
    for p, dp in d.homogeneous_parts().items():
        for q, eq in e.homogeneous_parts().items():
            out = out + cup(dp, eq) - cup(eq, dp).scale(_sgn(p * q))
    return out


def compose_all(chart: Chart, fields: Sequence[VectorField]) -> DiffOp:
    out = DiffOp.identity(chart)
    for x in fields:
        out = compose(out, x.as_diffop())
    return out


def delta_appendix(fields: Sequence[VectorField]) -> PolyDiffOp:
    """Coproduct of X_1 o ... o X_n as a signed sum of canonical brackets."""
    if not fields:
        raise ValueError("empty list of vector fields")
    chart = fields[0].chart
    n = len(fields)
    degs = [x.degree for x in fields]
    out = PolyDiffOp.zero(chart)
    rest = list(range(2, n + 1))
    for p in range(1, n + 1):
        for sh in shuffles(p - 1, n - p):
            sigma = [rest[s - 1] for s in sh]
            first = [1] + sigma[: p - 1]
            second = sigma[p - 1:]
            tau = sum(degs[k - 1] for k in second)
            kappa = koszul_sign(sh, degs[1:]) if n > 1 else 1
            left = compose_all(chart, [fields[k - 1] for k in first])
            right = compose_all(chart, [fields[k - 1] for k in second])
            br = free_bracket(PolyDiffOp.from_diffop(left), PolyDiffOp.from_diffop(right))
            out = out + br.scale(_sgn(tau) * kappa)
    return out


# ---------------------------------------------------------------------------
# Hopf structure


def word_algebra(chart: Chart) -> WordAlgebra:
    degs = chart.degrees
    return WordAlgebra(degs, lambda b: 1 + der_degree(degs, b))


class TwoFold:
    """An element of D_poly (x)^ D_poly: (A, left word, right word) -> c."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping):
        self.chart = chart
        self.terms = {k: Fraction(v) for k, v in terms.items() if v}

    def triples(self) -> list[tuple[PolyDiffOp, PolyDiffOp, Fraction]]:
        """(left, right, coefficient) with the coefficient function carried by the left factor."""
        out = []
        for (a, u, v), c in sorted(self.terms.items()):
            out.append((PolyDiffOp(self.chart, {(a, u): 1}), PolyDiffOp(self.chart, {(self.chart.zero_monomial(), v): 1}), c))
        return out

    def __eq__(self, other):
        return isinstance(other, TwoFold) and self.chart == other.chart and self.terms == other.terms

    def __len__(self):
        return len(self.terms)


def shuffle_coproduct(d: PolyDiffOp) -> TwoFold:
    return TwoFold(d.chart, word_algebra(d.chart).shuffle_coproduct(d.terms))


def antipode(d: PolyDiffOp) -> PolyDiffOp:
    return PolyDiffOp(d.chart, word_algebra(d.chart).antipode(d.terms))


def antipode_as_displayed(d: PolyDiffOp) -> PolyDiffOp:
    """Reversal with the Koszul sign of reversal only; fails the antipode axiom."""
    return PolyDiffOp(d.chart, word_algebra(d.chart).reversal_as_displayed(d.terms))


def unit(f: Poly) -> PolyDiffOp:
    return PolyDiffOp.from_function(f)


def counit(d: PolyDiffOp) -> Poly:
    return Poly(d.chart, {a: v for (a, bs), v in d.terms.items() if not bs})


def hopf_axioms(d: PolyDiffOp, e: PolyDiffOp) -> dict[str, bool]:
    return word_algebra(d.chart).check_axioms(d.terms, e.terms)


def antipode_defect(d: PolyDiffOp, t=antipode) -> PolyDiffOp:
    """cup o (t (x) id) o shuffle coproduct, minus unit o counit."""
    wa = word_algebra(d.chart)
    lhs = wa.multiply_out(wa.shuffle_coproduct(d.terms), left_map=lambda x: t(PolyDiffOp(d.chart, x)).terms)
    return PolyDiffOp(d.chart, lhs) - unit(counit(d))


# ---------------------------------------------------------------------------
# polyvector fields and the HKR map


class PolyVector:
    """A linear combination of symmetric words X_1 . ... . X_n of homogeneous vector fields."""

    def __init__(self, chart: Chart, words: Iterable[tuple[Fraction, tuple[VectorField, ...]]]):
        self.chart = chart
        self.words = [(Fraction(c), tuple(w)) for c, w in words if c]
        for _, w in self.words:
            for x in w:
                if not x.is_homogeneous():
                    raise ValueError("polyvector factors must be homogeneous")

    @classmethod
    def word(cls, *fields: VectorField) -> "PolyVector":
        return cls(fields[0].chart, [(Fraction(1), tuple(fields))])

    def __add__(self, other: "PolyVector") -> "PolyVector":
        return PolyVector(self.chart, self.words + other.words)

    def scale(self, c) -> "PolyVector":
        return PolyVector(self.chart, [(c * k, w) for k, w in self.words])


def symmetrize(chart: Chart, factors: Sequence[PolyDiffOp], degrees: Sequence[int]) -> PolyDiffOp:
    """(1/n!) sum_sigma kappa(sigma) F_sigma(1) (x) ... (x) F_sigma(n)."""
    n = len(factors)
    if n == 0:
        return PolyDiffOp.from_function(Poly.const(chart, 1))
    out: dict = {}
    for perm in itertools.permutations(range(1, n + 1)):
        k = koszul_sign(perm, degrees)
        prod = factors[perm[0] - 1]
        for s in perm[1:]:
            prod = cup(prod, factors[s - 1])
        for key, v in prod.terms.items():
            _acc(out, key, k * v)
    return PolyDiffOp(chart, out).scale(Fraction(1, factorial(n)))


def hkr(v: PolyVector) -> PolyDiffOp:
    out = PolyDiffOp.zero(v.chart)
    for c, w in v.words:
        factors = [PolyDiffOp.from_vector_field(x) for x in w]
        out = out + symmetrize(v.chart, factors, [1 + x.degree for x in w]).scale(c)
    return out


def L_Q_polyvector(q: HomologicalField | VectorField, v: PolyVector) -> PolyVector:
    """Derivation extension of [Q, .] with signs from total degrees."""
    from .derivations import lie_bracket

    qf = q.field if isinstance(q, HomologicalField) else q
    words = []
    for c, w in v.words:
        acc = 0
        for i, x in enumerate(w):
            qx = lie_bracket(qf, x)
            if not qx.is_zero():
                words.append((c * _sgn(acc), w[:i] + (qx,) + w[i + 1:]))
            acc += 1 + x.degree
    return PolyVector(v.chart, words)
