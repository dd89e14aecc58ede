"""Seeded random corpora of homogeneous objects for checks and tests.

Every generator takes an LCG so a seed fixes the whole corpus.  Degrees that
cannot be realized within the bounds produce zero objects.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .atiyah import Connection, FreeDgModule, ModuleMorphism
from .derivations import DiffOp, VectorField, der_degree, lie_bracket
from .graded_algebra import Chart, Poly, homogeneous_random_poly, mono_degree, monomials_up_to
from .lcg import LCG
from .poly_complex import PolyDiffOp, cup


@dataclass(frozen=True)
class Bounds:
    max_arity: int = 3
    max_order: int = 2
    max_poly_degree: int = 4
    samples: int = 200


@lru_cache(maxsize=None)
def der_monomials(chart: Chart, max_order: int) -> tuple[tuple[int, ...], ...]:
    """Derivative exponent tuples of order <= max_order, odd coordinates at most once."""
    ranges = [range(2 if d % 2 else max_order + 1) for d in chart.degrees]
    return tuple(b for b in itertools.product(*ranges) if sum(b) <= max_order)


def _coef(rng: LCG) -> Fraction:
    return Fraction(rng.randint(-3, 3) or 1)


def random_poly(chart: Chart, degree: int, rng: LCG, max_total: int = 3) -> Poly:
    return homogeneous_random_poly(chart, degree, rng, max_total=max_total)


def random_degree(chart: Chart, rng: LCG, lo: int = -2, hi: int = 2) -> int:
    return rng.randint(lo, hi)


def random_vector_field(chart: Chart, degree: int, rng: LCG, max_total: int = 2) -> VectorField:
    comps = []
    for d in chart.degrees:
        comps.append(random_poly(chart, degree + d, rng, max_total) if rng.randrange(2) else Poly.zero(chart))
    return VectorField(chart, tuple(comps))


def random_diffop(chart: Chart, degree: int, rng: LCG, max_order: int = 2, max_total: int = 2,
                  max_terms: int = 3) -> DiffOp:
    degs = chart.degrees
    pool = [(a, b) for b in der_monomials(chart, max_order) for a in monomials_up_to(chart, max_total)
            if mono_degree(degs, a) + der_degree(degs, b) == degree]
    terms: dict = {}
    if pool:
        for _ in range(rng.randint(1, max_terms)):
            k = pool[rng.randrange(len(pool))]
            terms[k] = terms.get(k, 0) + _coef(rng)
    return DiffOp(chart, terms)


def random_polydiffop(chart: Chart, arity: int, degree: int, rng: LCG, max_order: int = 2,
                      max_total: int = 2) -> PolyDiffOp:
    """Homogeneous of total degree ``degree`` in tot D_poly (arity counted in the degree)."""
    if arity == 0:
        return PolyDiffOp.from_function(random_poly(chart, degree, rng, max_total))
    out = PolyDiffOp.zero(chart)
    for _ in range(rng.randint(1, 2)):
        inner = [rng.randint(-1, 1) for _ in range(arity - 1)]
        last = degree - arity - sum(inner)
        factors = [random_diffop(chart, d, rng, max_order, max_total if i == 0 else 1, 2)
                   for i, d in enumerate(inner + [last])]
        term = PolyDiffOp.from_diffop(factors[0])
        for f in factors[1:]:
            term = cup(term, PolyDiffOp.from_diffop(f))
        out = out + term
    return out


def random_module(chart: Chart, q: VectorField, rank: int, rng: LCG) -> FreeDgModule:
    """Free module with basis degrees in {-1, 0, 1} and zero differential on the basis."""
    basis = [(f"e{k}", rng.randint(-1, 1)) for k in range(rank)]
    return FreeDgModule(chart, basis, q)


def random_module_elt(module: FreeDgModule, degree: int, rng: LCG, max_total: int = 2):
    return module.element([random_poly(module.chart, degree - d, rng, max_total) if rng.randrange(3) else Poly.zero(module.chart)
                           for d in module.basis_degrees])


def random_connection(module: FreeDgModule, rng: LCG, density: int = 3) -> Connection:
    """Degree 0 Christoffel symbols: Gamma(i, a) has degree |e_a| - |x_i|."""
    chart = module.chart
    chris = {}
    for i, d in enumerate(chart.degrees):
        for a, da in enumerate(module.basis_degrees):
            if rng.randrange(density) == 0:
                v = random_module_elt(module, da - d, rng, 1)
                if not v.is_zero():
                    chris[(i, a)] = v
    return Connection(module, chris)


def random_chain_morphism(source: FreeDgModule, target: FreeDgModule, rng: LCG, attempts: int = 20) -> ModuleMorphism:
    """Degree 0 morphism commuting with L_Q; rejection sampling over small images."""
    for _ in range(attempts):
        images = tuple(random_module_elt(target, d, rng, 1) for d in source.basis_degrees)
        phi = ModuleMorphism(source, target, images)
        if phi.is_chain_map():
            return phi
    return ModuleMorphism(source, target, tuple(
        target.basis(a).scale(rng.randint(1, 3)) if a < target.rank and target.basis_degrees[a] == d else target.zero()
        for a, d in enumerate(source.basis_degrees)))


def is_homological(q: VectorField) -> bool:
    return lie_bracket(q, q).is_zero()
