"""The free Lie algebra L(D^1_poly) inside D_poly, pbw, theta and the omega series.

Because D^1_poly is free over the function ring with the constant derivative
monomials d^B as a basis, L(D^1_poly) is the function-valued extension of the
free graded Lie algebra on those letters.  Membership is therefore decided one
coefficient monomial at a time by exact linear algebra over bracket words.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence, Union

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .derivations import HomologicalField, VectorField, der_degree
from .graded_algebra import Chart, Poly, koszul_sign, todd_like_coeffs
from .poly_complex import (
    PolyDiffOp,
    PolyVector,
    L_Q,
    cup,
    free_bracket,
    hochschild_d,
    symmetrize,
)


def _sgn(parity: int) -> int:
    return -1 if parity % 2 else 1


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Gen:
    op: PolyDiffOp


@dataclass(frozen=True)
class Br:
    left: "Cert"
    right: "Cert"


@dataclass(frozen=True)
class Lin:
    parts: tuple[tuple[Fraction, "Cert"], ...]


@dataclass(frozen=True)
class Mul:
    coeff: Poly
    inner: "Cert"


Cert = Union[Gen, Br, Lin, Mul]


def expand(cert: Cert, chart: Chart) -> PolyDiffOp:
    if isinstance(cert, Gen):
        return cert.op
    if isinstance(cert, Br):
        return free_bracket(expand(cert.left, chart), expand(cert.right, chart))
    if isinstance(cert, Mul):
        return cup(PolyDiffOp.from_function(cert.coeff), expand(cert.inner, chart))
    out = PolyDiffOp.zero(chart)
    for k, c in cert.parts:
        out = out + expand(c, chart).scale(k)
    return out


class FreeLieElt:
    """A value in D_poly together with a bracket-word certificate for it."""

    __slots__ = ("value", "certificate")

    def __init__(self, value: PolyDiffOp, certificate: Cert):
        self.value = value
        self.certificate = certificate

    @classmethod
    def generator(cls, d: PolyDiffOp) -> "FreeLieElt":
        if d.arities() - {1}:
            raise ValueError("generators of L(D^1_poly) have arity 1")
        return cls(d, Gen(d))

    @property
    def chart(self) -> Chart:
        return self.value.chart

    @property
    def degree(self) -> int:
        return self.value.degree

    def verify(self) -> bool:
        return expand(self.certificate, self.chart) == self.value

    def __add__(self, other: "FreeLieElt") -> "FreeLieElt":
        return FreeLieElt(self.value + other.value,
                          Lin(((Fraction(1), self.certificate), (Fraction(1), other.certificate))))

    def scale(self, c) -> "FreeLieElt":
        c = Fraction(c)
        return FreeLieElt(self.value.scale(c), Lin(((c, self.certificate),)))

    def __neg__(self) -> "FreeLieElt":
        return self.scale(-1)

    def __sub__(self, other: "FreeLieElt") -> "FreeLieElt":
        return self + (-other)

    def times(self, f: Poly) -> "FreeLieElt":
        return FreeLieElt(cup(PolyDiffOp.from_function(f), self.value), Mul(f, self.certificate))

    def __eq__(self, other):
        return isinstance(other, FreeLieElt) and self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"FreeLieElt({self.value})"


def lie_bracket_free(a: FreeLieElt, b: FreeLieElt) -> FreeLieElt:
    return FreeLieElt(free_bracket(a.value, b.value), Br(a.certificate, b.certificate))


def theta(x: VectorField) -> FreeLieElt:
    return FreeLieElt.generator(PolyDiffOp.from_vector_field(x))


# ---------------------------------------------------------------------------
# membership


def _letter_degree(degs, b) -> int:
    return 1 + der_degree(degs, b)


def _bracket_words(letter_degree: Callable[[Hashable], int], letters: Sequence) -> dict[tuple, int]:
    """Right-normed [[l_1, [[l_2, ... l_n]]]] expanded into words over constant letters."""
    acc: dict[tuple, int] = {(letters[-1],): 1}
    deg = letter_degree(letters[-1])
    for l in reversed(letters[:-1]):
        dl = letter_degree(l)
        nxt: dict[tuple, int] = {}
        s = _sgn(dl * deg)
        for w, c in acc.items():
            nxt[(l,) + w] = nxt.get((l,) + w, 0) + c
            nxt[w + (l,)] = nxt.get(w + (l,), 0) - s * c
        acc = {w: c for w, c in nxt.items() if c}
        deg += dl
    return acc


def _solve(columns: list[dict], target: dict) -> list[Fraction] | None:
    """Exact solution x of sum_k x_k columns[k] = target, or None."""
    rows = sorted(set(target).union(*[set(c) for c in columns]))
    index = {w: i for i, w in enumerate(rows)}
    ncol = len(columns)
    data = [[QQ(0)] * (ncol + 1) for _ in rows]
    for k, col in enumerate(columns):
        for w, c in col.items():
            data[index[w]][k] = QQ(c)
    for w, c in target.items():
        data[index[w]][ncol] = QQ(c.numerator, c.denominator)
    m = DomainMatrix(data, (len(rows), ncol + 1), QQ)
    rref, pivots = m.rref()
    if ncol in pivots:
        return None
    sol = [Fraction(0)] * ncol
    dense = rref.to_Matrix()
    for r, p in enumerate(pivots):
        v = dense[r, ncol]
        sol[p] = Fraction(int(v.p), int(v.q))
    return sol


def bracket_span_solve(target: Mapping[tuple, Fraction], letter_degree: Callable[[Hashable], int]):
    """Write a homogeneous-in-letters word table as right-normed brackets.

    All words of ``target`` must use the same multiset of letters.  Returns a
    list of (letter sequence, coefficient) or None when no combination exists.
    """
    if not target:
        return []
    multiset = tuple(sorted(next(iter(target))))
    seqs = sorted(set(itertools.permutations(multiset)))
    sol = _solve([_bracket_words(letter_degree, s) for s in seqs], dict(target))
    if sol is None:
        return None
    return [(s, x) for s, x in zip(seqs, sol) if x]


def _slices(d: PolyDiffOp) -> dict[tuple, dict[tuple, Fraction]]:
    out: dict = {}
    for (a, bs), c in d.terms.items():
        out.setdefault(a, {})[bs] = c
    return out


def free_lie_decomposition(d: PolyDiffOp, max_len: int) -> FreeLieElt | None:
    """A certified FreeLieElt with value d, or None when d is not in L(D^1_poly)."""
    if any(n > max_len for n in d.arities()):
        raise ValueError(f"arity exceeds max_len={max_len}")
    if 0 in d.arities():
        return None
    chart = d.chart
    degs = chart.degrees
    parts: list[tuple[Fraction, Cert]] = []
    for a, words in _slices(d).items():
        groups: dict[tuple, dict] = {}
        for w, c in words.items():
            groups.setdefault(tuple(sorted(w)), {})[w] = c
        coeff = Poly.monomial(chart, a)
        for target in groups.values():
            found = bracket_span_solve(target, lambda l: _letter_degree(degs, l))
            if found is None:
                return None
            for s, x in found:
                if x:
                    parts.append((x, Mul(coeff, _right_normed(chart, s))))
    if not parts:
        return FreeLieElt(d, Lin(()))
    return FreeLieElt(d, Lin(tuple(parts)))


def _right_normed(chart: Chart, letters: Sequence[tuple]) -> Cert:
    z = chart.zero_monomial()
    gens = [Gen(PolyDiffOp(chart, {(z, (b,)): 1})) for b in letters]
    out: Cert = gens[-1]
    for g in reversed(gens[:-1]):
        out = Br(g, out)
    return out


def is_in_free_lie(d: PolyDiffOp, max_len: int) -> bool:
    if d.is_zero():
        return True
    return free_lie_decomposition(d, max_len) is not None


# ---------------------------------------------------------------------------
# differentials on certified elements


def lq_free(q: HomologicalField | VectorField, a: FreeLieElt) -> FreeLieElt:
    """L_Q as a derivation of the canonical bracket; generators stay generators."""

    def go(c: Cert) -> tuple[PolyDiffOp, Cert]:
        if isinstance(c, Gen):
            v = L_Q(q, c.op)
            return v, Gen(v)
        if isinstance(c, Br):
            lv, lc = go(c.left)
            rv, rc = go(c.right)
            left, right = expand(c.left, a.chart), expand(c.right, a.chart)
            val = free_bracket(lv, right) + free_bracket(left, rv).scale(_sgn(left.degree))
            return val, Lin(((Fraction(1), Br(lc, c.right)), (Fraction(_sgn(left.degree)), Br(c.left, rc))))
        if isinstance(c, Mul):
            qf = q.field if isinstance(q, HomologicalField) else q
            iv, ic = go(c.inner)
            inner = expand(c.inner, a.chart)
            qc = qf(c.coeff)
            s = _sgn(c.coeff.degree) if not c.coeff.is_zero() else 1
            val = cup(PolyDiffOp.from_function(qc), inner) + cup(PolyDiffOp.from_function(c.coeff), iv).scale(s)
            return val, Lin(((Fraction(1), Mul(qc, c.inner)), (Fraction(s), Mul(c.coeff, ic))))
        vals = []
        certs = []
        for k, sub in c.parts:
            v, sc = go(sub)
            vals.append(v.scale(k))
            certs.append((k, sc))
        total = PolyDiffOp.zero(a.chart)
        for v in vals:
            total = total + v
        return total, Lin(tuple(certs))

    value, cert = go(a.certificate)
    return FreeLieElt(value, cert)


def dh_free(a: FreeLieElt, max_len: int = 4) -> FreeLieElt | None:
    """d_H(a) with a certificate from the membership solver, or None if it leaves L."""
    return free_lie_decomposition(hochschild_d(a.value), max_len)


# ---------------------------------------------------------------------------
# symmetric words and pbw


class SymWord:
    """c * G_1 . ... . G_n in S(L(D^1_poly)); factors must be homogeneous."""

    __slots__ = ("coeff", "factors")

    def __init__(self, factors: Sequence[FreeLieElt], coeff=1):
        for g in factors:
            if not g.value.is_homogeneous():
                raise ValueError("symmetric word factors must be homogeneous")
        self.coeff = Fraction(coeff)
        self.factors = tuple(factors)

    @property
    def degrees(self) -> list[int]:
        return [g.degree for g in self.factors]

    def __len__(self):
        return len(self.factors)

    def canonical(self) -> "SymWord":
        """Factors sorted by (total degree, rendered value), Koszul sign folded into coeff."""
        n = len(self.factors)
        keys = [(g.degree, str(g.value)) for g in self.factors]
        order = sorted(range(n), key=lambda i: keys[i])
        sigma = [i + 1 for i in order]
        sign = koszul_sign(sigma, self.degrees) if n else 1
        facs = tuple(self.factors[i] for i in order)
        coeff = self.coeff * sign
        for i in range(n - 1):
            if facs[i].degree % 2 and keys[order[i]] == keys[order[i + 1]]:
                coeff = Fraction(0)
        return SymWord(facs, coeff)

    def __eq__(self, other):
        if not isinstance(other, SymWord):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        if a.coeff == 0 and b.coeff == 0:
            return True
        return a.coeff == b.coeff and [g.value for g in a.factors] == [g.value for g in b.factors]

    def __hash__(self):
        c = self.canonical()
        return hash((c.coeff, tuple(g.value for g in c.factors)))

    def __repr__(self):
        return f"SymWord({self.coeff}, {list(self.factors)})"


def mu(s: SymWord, g: FreeLieElt) -> SymWord:
    return SymWord(s.factors + (g,), s.coeff)


def pbw(w: SymWord, chart: Chart | None = None) -> PolyDiffOp:
    """(1/n!) sum_sigma kappa(sigma) G_sigma(1) (x) ... (x) G_sigma(n)."""
    if chart is None:
        if not w.factors:
            raise ValueError("chart required for the empty word")
        chart = w.factors[0].chart
    return symmetrize(chart, [g.value for g in w.factors], w.degrees).scale(w.coeff)


def sym_theta(v: PolyVector) -> list[SymWord]:
    """S(theta) on a polyvector: each symmetric word of fields becomes a word of generators."""
    return [SymWord([theta(x) for x in word], c) for c, word in v.words]


def pbw_sym_theta(v: PolyVector) -> PolyDiffOp:
    out = PolyDiffOp.zero(v.chart)
    for w in sym_theta(v):
        out = out + pbw(w, v.chart)
    return out


# ---------------------------------------------------------------------------
# the omega series


Pair = tuple[Fraction, tuple[FreeLieElt, ...], FreeLieElt]


def omega(s: SymWord, g: FreeLieElt) -> list[Pair]:
    out: list[Pair] = []
    facs = s.factors
    degs = s.degrees
    for i, gi in enumerate(facs):
        tail = sum(degs[i + 1:])
        sign = _sgn(tail * degs[i])
        out.append((s.coeff * sign, facs[:i] + facs[i + 1:], lie_bracket_free(gi, g)))
    return out


def _omega_all(pairs: Iterable[Pair]) -> list[Pair]:
    out: list[Pair] = []
    for c, facs, g in pairs:
        for c2, f2, g2 in omega(SymWord(facs), g):
            out.append((c * c2, f2, g2))
    return out


def r1_lhs(s: SymWord, g: FreeLieElt) -> PolyDiffOp:
    """pbw(mu(omega / (1 - e^{-omega}) (s (x) g))), a finite sum by nilpotence."""
    chart = g.chart
    n = len(s)
    beta = todd_like_coeffs(n)
    level: list[Pair] = [(s.coeff, s.factors, g)]
    out = PolyDiffOp.zero(chart)
    for k in range(n + 1):
        if beta[k]:
            for c, facs, h in level:
                out = out + pbw(mu(SymWord(facs, c), h), chart).scale(beta[k])
        level = _omega_all(level)
    return out


def r1_rhs(s: SymWord, g: FreeLieElt) -> PolyDiffOp:
    return cup(pbw(s, g.chart), g.value)


def omega_tilde(s: Sequence[VectorField], x: VectorField,
                alpha: Callable[[VectorField, VectorField], VectorField]) -> list[tuple[int, tuple[VectorField, ...], VectorField]]:
    """Shifted fields X_bar_i are passed as the underlying fields; alpha is a cocycle representative."""
    out = []
    shifted = [1 + y.degree for y in s]
    for i, xi in enumerate(s):
        diamond = sum(shifted[i + 1:]) * shifted[i]
        val = alpha(xi, x)
        if not val.is_zero():
            out.append((_sgn(diamond), tuple(s[:i]) + tuple(s[i + 1:]), val))
    return out
