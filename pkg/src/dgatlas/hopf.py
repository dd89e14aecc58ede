"""Tensor-word Hopf algebra engine.

Elements of a tensor algebra over a graded-commutative coefficient ring are
dicts ``(A, word) -> c`` meaning ``c * x^A * (l_1 (x) ... (x) l_n)``, with the
coefficient always on the far left.  Elements of the two-fold tensor product
are dicts ``(A, left, right) -> c``.  Letters are opaque hashable values whose
total degree is given by a callback.  Both the polydifferential operators and
the Lie-pair complex over a point instantiate this engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Sequence

from .graded_algebra import koszul_sign, mono_degree, mono_mul, shuffles

Letter = Hashable
Word = tuple
Elt = dict  # (A, word) -> Fraction
Elt2 = dict  # (A, left, right) -> Fraction


def _add(out: dict, key, value):
    v = out.get(key, 0) + value
    if v:
        out[key] = v
    else:
        out.pop(key, None)


@dataclass(frozen=True)
class WordAlgebra:
    """Concatenation product, shuffle coproduct, unit, counit and antipode."""

    coeff_degrees: tuple[int, ...]
    letter_degree: Callable[[Letter], int]

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self.coeff_degrees)

    def word_degree(self, w: Sequence[Letter]) -> int:
        return sum(self.letter_degree(l) for l in w)

    def coeff_degree(self, a) -> int:
        return mono_degree(self.coeff_degrees, a)

    # product ---------------------------------------------------------------
    def concat(self, x: Elt, y: Elt) -> Elt:
        """x^A u . x^C v = (-1)^{|C||u|} x^A x^C (u v)."""
        out: Elt = {}
        for (a, u), p in x.items():
            du = self.word_degree(u)
            for (c, v), q in y.items():
                m = mono_mul(self.coeff_degrees, a, c)
                if m is None:
                    continue
                sign = m[0] * (-1 if (self.coeff_degree(c) * du) % 2 else 1)
                _add(out, (m[1], u + v), sign * p * q)
        return out

    def product2(self, x: Elt2, y: Elt2) -> Elt2:
        """Product on the two-fold tensor power with the Koszul interchange."""
        out: Elt2 = {}
        for (a, u1, u2), p in x.items():
            du = self.word_degree(u1) + self.word_degree(u2)
            d2 = self.word_degree(u2)
            for (c, v1, v2), q in y.items():
                m = mono_mul(self.coeff_degrees, a, c)
                if m is None:
                    continue
                par = self.coeff_degree(c) * du + d2 * self.word_degree(v1)
                sign = m[0] * (-1 if par % 2 else 1)
                _add(out, (m[1], u1 + v1, u2 + v2), sign * p * q)
        return out

    # coproduct -------------------------------------------------------------
    def shuffle_coproduct(self, x: Elt) -> Elt2:
        out: Elt2 = {}
        for (a, w), c in x.items():
            n = len(w)
            degs = [self.letter_degree(l) for l in w]
            for p in range(n + 1):
                for sigma in shuffles(p, n - p):
                    k = koszul_sign(sigma, degs)
                    left = tuple(w[s - 1] for s in sigma[:p])
                    right = tuple(w[s - 1] for s in sigma[p:])
                    _add(out, (a, left, right), k * c)
        return out

    def coproduct_left(self, x: Elt2) -> dict:
        """(coproduct (x) id) applied to a two-fold element."""
        out: dict = {}
        for (a, u, v), c in x.items():
            for (_, l, r), k in self.shuffle_coproduct({(self.zero, u): 1}).items():
                _add(out, (a, l, r, v), k * c)
        return out

    def coproduct_right(self, x: Elt2) -> dict:
        out: dict = {}
        for (a, u, v), c in x.items():
            for (_, l, r), k in self.shuffle_coproduct({(self.zero, v): 1}).items():
                _add(out, (a, u, l, r), k * c)
        return out

    # unit, counit, antipode -------------------------------------------------
    @staticmethod
    def unit(f: dict) -> Elt:
        """f given as a monomial table A -> c."""
        return {(a, ()): Fraction(c) for a, c in f.items() if c}

    @staticmethod
    def counit(x: Elt) -> dict:
        return {a: c for (a, w), c in x.items() if not w}

    def reversal_sign(self, w: Sequence[Letter]) -> int:
        n = len(w)
        rev = tuple(range(n, 0, -1))
        return koszul_sign(rev, [self.letter_degree(l) for l in w])

    def antipode(self, x: Elt) -> Elt:
        """t(l_1...l_n) = (-1)^n kappa(reversal) l_n...l_1."""
        out: Elt = {}
        for (a, w), c in x.items():
            s = self.reversal_sign(w) * (-1) ** len(w)
            _add(out, (a, tuple(reversed(w))), s * c)
        return out

    def reversal_as_displayed(self, x: Elt) -> Elt:
        """Reversal with the Koszul sign alone, without the (-1)^n factor."""
        out: Elt = {}
        for (a, w), c in x.items():
            _add(out, (a, tuple(reversed(w))), self.reversal_sign(w) * c)
        return out

    # axiom helpers ------------------------------------------------------------
    def multiply_out(self, x: Elt2, left_map: Callable[[Elt], Elt] | None = None,
                     right_map: Callable[[Elt], Elt] | None = None) -> Elt:
        """cup o (left_map (x) right_map); both maps must have degree 0."""
        out: Elt = {}
        z = self.zero
        for (a, u, v), c in x.items():
            lu = left_map({(z, u): 1}) if left_map else {(z, u): 1}
            rv = right_map({(z, v): 1}) if right_map else {(z, v): 1}
            prod = self.concat({(a, ()): c}, self.concat(lu, rv))
            for k, val in prod.items():
                _add(out, k, val)
        return out

    def counit_left(self, x: Elt2) -> Elt:
        return {(a, v): c for (a, u, v), c in x.items() if not u}

    def counit_right(self, x: Elt2) -> Elt:
        return {(a, u): c for (a, u, v), c in x.items() if not v}

    def unit_counit(self, x: Elt) -> Elt:
        return {(a, w): c for (a, w), c in x.items() if not w}

    def check_axioms(self, x: Elt, y: Elt) -> dict[str, bool]:
        """Hopf axioms on sample elements; returns a name -> holds table."""
        d = self.shuffle_coproduct(x)
        res = {
            "coassociative": self.coproduct_left(d) == self.coproduct_right(d),
            "counit_left": self.counit_left(d) == x,
            "counit_right": self.counit_right(d) == x,
            "multiplicative": self.shuffle_coproduct(self.concat(x, y))
            == self.product2(self.shuffle_coproduct(x), self.shuffle_coproduct(y)),
            "antipode_left": self.multiply_out(d, left_map=self.antipode) == self.unit_counit(x),
            "antipode_right": self.multiply_out(d, right_map=self.antipode) == self.unit_counit(x),
        }
        return res
