from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgatlas.graded_algebra import (
    BiDegree,
    Chart,
    ChartMismatch,
    ParseError,
    Poly,
    compose_permutations,
    homogeneous_random_poly,
    koszul_sign,
    parse_poly,
    poly_mul,
    render_poly,
    shuffles,
    todd_like_coeffs,
)
from dgatlas.lcg import LCG
from support import G1, MIXED, P, seeds

EVEN1 = Chart.of(("x", 0))
ODD1 = Chart.of(("xi", 1))


def test_odd_transposition_sign():
    xi1, xi2 = Poly.var(G1, "xi1"), Poly.var(G1, "xi2")
    assert xi1 * xi2 == parse_poly("xi1*xi2", G1)
    assert xi2 * xi1 == -(xi1 * xi2)


def test_odd_square_vanishes():
    xi = Poly.var(ODD1, "xi")
    assert (xi * xi).is_zero()


def test_even_product():
    x = Poly.var(EVEN1, "x")
    assert poly_mul(x + 1, x - 1) == x**2 - 1


def test_chart_mismatch():
    with pytest.raises(ChartMismatch):
        Poly.var(G1, 0) * Poly.var(MIXED, 0)


def test_duplicate_coordinate_names_rejected():
    with pytest.raises(ValueError):
        Chart.of(("x", 0), ("x", 1))


def test_bidegree_total():
    assert BiDegree(2, -3).total == -1


@pytest.mark.parametrize(
    "sigma, degrees, expected",
    [
        ((1, 2, 3), (1, 1, 1), 1),
        ((2, 1), (1, 1), -1),
        ((2, 1, 3), (1, 1, 0), -1),
        ((2, 1), (2, 1), 1),
        ((3, 1, 2), (1, 1, 1), 1),
    ],
)
def test_koszul_sign_examples(sigma, degrees, expected):
    assert koszul_sign(sigma, degrees) == expected


def test_koszul_sign_length_mismatch():
    with pytest.raises(ValueError):
        koszul_sign((1, 2), (1,))


@given(st.permutations(range(1, 5)), st.permutations(range(1, 5)),
       st.lists(st.integers(-2, 2), min_size=4, max_size=4))
def test_koszul_sign_multiplicative(sigma, tau, degrees):
    # moving to the sigma order, then permuting the new list by tau
    moved = [degrees[s - 1] for s in sigma]
    assert koszul_sign(compose_permutations(sigma, tau), degrees) == (
        koszul_sign(sigma, degrees) * koszul_sign(tau, moved))


@pytest.mark.parametrize("p, q, count", [(1, 1, 2), (2, 1, 3), (0, 3, 1)])
def test_shuffle_counts(p, q, count):
    assert len(shuffles(p, q)) == count


def test_zero_n_shuffle_is_identity():
    assert shuffles(0, 4) == [(1, 2, 3, 4)]


@given(st.integers(0, 4), st.integers(0, 4))
def test_shuffles_binomial_and_monotone(p, q):
    sh = shuffles(p, q)
    assert len(sh) == comb(p + q, p) == len(set(sh))
    for s in sh:
        assert list(s[:p]) == sorted(s[:p]) and list(s[p:]) == sorted(s[p:])


def test_todd_like_coefficients():
    assert todd_like_coeffs(3) == [1, Fraction(1, 2), Fraction(1, 12), 0]


def test_todd_like_recurrence():
    beta = todd_like_coeffs(8)
    # (1 - e^{-x}) * sum beta_k x^k = x, coefficientwise
    series = [Fraction(0)] + [Fraction((-1) ** (j + 1), _fact(j)) for j in range(1, 10)]
    for n in range(1, 9):
        assert sum(series[j] * beta[n - j] for j in range(1, n + 1)) == (1 if n == 1 else 0)


def _fact(n: int) -> int:
    return 1 if n <= 1 else n * _fact(n - 1)


def test_parse_examples():
    assert parse_poly("-xi1*xi2", G1) == -(Poly.var(G1, 0) * Poly.var(G1, 1))
    assert parse_poly("xi2*xi1", G1) == parse_poly("-xi1*xi2", G1)
    x = Poly.var(EVEN1, "x")
    assert parse_poly("1/2*x^2 + 3", EVEN1) == (x**2).scale(Fraction(1, 2)) + 3


@pytest.mark.parametrize("src, pos", [("x + * 2", 4), ("x + q", 4), ("(x", 2)])
def test_parse_errors_carry_position(src, pos):
    with pytest.raises(ParseError) as info:
        parse_poly(src, EVEN1)
    assert info.value.position == pos


def _hom_pair(seed):
    rng = LCG(seed)
    a = homogeneous_random_poly(MIXED, rng.randint(-2, 2), rng, max_total=3)
    b = homogeneous_random_poly(MIXED, rng.randint(-2, 2), rng, max_total=3)
    return a, b


@given(seeds)
def test_graded_commutativity(seed):
    a, b = _hom_pair(seed)
    if a.is_zero() or b.is_zero():
        return
    assert a * b == (b * a).scale((-1) ** (a.degree * b.degree))


@given(seeds)
def test_associativity(seed):
    rng = LCG(seed)
    a, b, c = (homogeneous_random_poly(MIXED, rng.randint(-1, 1), rng, max_total=2) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@given(seeds)
def test_render_parse_roundtrip(seed):
    a, b = _hom_pair(seed)
    p = a + b.scale(Fraction(-2, 3))
    assert parse_poly(render_poly(p), MIXED) == p
    assert parse_poly(render_poly(parse_poly(render_poly(p), MIXED)), MIXED) == p


def test_monomial_normal_form_is_unique():
    seen = {}
    for word in itertools.permutations(["xi", "eta", "x", "x"]):
        p = parse_poly("*".join(word), MIXED)
        seen.setdefault(tuple(sorted(p.terms)), set()).add(tuple(p.terms.values()))
    assert len(seen) == 1
    assert all(abs(c) == 1 for cs in seen.values() for t in cs for c in t)


def test_homogeneous_parts_and_degree():
    p = P("x*xi + eta + 2")
    assert p.degrees() == {0, 1, -1}
    parts = p.homogeneous_parts()
    assert parts[1] == P("x*xi") and parts[-1] == P("eta")
    with pytest.raises(ValueError):
        _ = p.degree
