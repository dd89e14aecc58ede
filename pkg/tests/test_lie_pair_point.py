from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgatlas.derivations import PreconditionError, check_homological
from dgatlas.lie_pair_point import (
    BottExtension,
    CECochain,
    LiePairPoint,
    UEnv,
    a_action,
    a_action_before_quotient,
    a_action_words,
    antipode_B_as_displayed,
    bott_module,
    ce_differential,
    ce_homological_field,
    check_representation,
    connection_difference,
    dpoly_b,
    end_module,
    free_bracket_B,
    hochschild_d_B,
    in_free_lie_B,
    lie_pair_atiyah_cocycle,
    quotient_to_DpolyB,
    straighten,
    u_coproduct,
    u_coproduct_words,
    word,
)

# sl2 with H = 0, E = 1, F = 2 and the Borel subalgebra h = <H, E>
SL2 = {(0, 1): {1: 2}, (0, 2): {2: -2}, (1, 2): {0: 1}}
AFFINE = {(0, 1): {1: 1}}


@pytest.fixture
def borel():
    return LiePairPoint(3, SL2, h=[0, 1])


@pytest.fixture
def affine():
    return LiePairPoint(2, AFFINE, h=[0])


b_letters = st.sampled_from([(0,), (1,), (2,), (3,)])
b_elements = st.dictionaries(st.lists(b_letters, max_size=3).map(lambda w: ((), tuple(w))),
                             st.integers(-3, 3).filter(bool).map(Fraction), min_size=1, max_size=3)
g_words = st.lists(st.integers(0, 2), max_size=5).map(tuple)


def test_quotient_kills_trailing_h(affine):
    u = UEnv(affine)
    assert quotient_to_DpolyB(affine, u.from_words({(1, 0): 1})) == {}
    # e0 e1 = e1 e0 + [e0, e1]
    assert quotient_to_DpolyB(affine, u.from_words({(0, 1): 1})) == {(1,): 1}


def test_bott_examples(affine, borel):
    assert affine.bott({0: 1}, {1: 1}) == {1: 1}
    assert borel.bott({0: 1}, {2: 1}) == {2: -2}
    # [E, F] = H lies in h
    assert borel.bott({1: 1}, {2: 1}) == {}


def test_bott_is_independent_of_the_lift(borel):
    assert borel.bott({0: 1}, {2: 1}, lift={2: 1, 0: 4, 1: -1}) == borel.bott({0: 1}, {2: 1})
    with pytest.raises(ValueError):
        borel.bott({0: 1}, {2: 1}, lift={1: 1})


def test_bott_is_a_representation(borel):
    assert check_representation(borel, bott_module(borel), [{2: Fraction(1)}])


def test_non_jacobi_structure_constants_rejected():
    bad = {(0, 1): {2: 1}, (0, 2): {0: 1}}
    with pytest.raises(PreconditionError):
        LiePairPoint(3, bad, h=[0])
    assert not check_homological(ce_homological_field(3, bad))
    assert check_homological(ce_homological_field(3, SL2))


def test_h_must_be_a_subalgebra():
    with pytest.raises(PreconditionError):
        LiePairPoint(3, SL2, h=[1, 2])


def test_splitting_must_be_a_section():
    with pytest.raises(PreconditionError):
        LiePairPoint(3, SL2, h=[0, 1], splitting={2: {1: 1}})


@pytest.mark.parametrize("lam", [Fraction(3), Fraction(-2, 5), Fraction(1)])
def test_affine_family_cocycle(affine, lam):
    nabla = BottExtension(affine, {(1, 1): {1: lam}})
    alpha = lie_pair_atiyah_cocycle(nabla)
    assert alpha == CECochain(1, {(0,): {(1, 1, 1): -lam}})


def test_affine_flat_extension_has_zero_cocycle(affine):
    assert lie_pair_atiyah_cocycle(BottExtension(affine)).is_zero()


def test_borel_cocycle_is_closed(borel):
    e = end_module(borel)
    for nabla in (BottExtension(borel), BottExtension(borel, {(2, 2): {2: 5}})):
        alpha = lie_pair_atiyah_cocycle(nabla)
        assert ce_differential(borel, alpha, e, samples=[{(2, 2, 2): Fraction(1)}]).is_zero()
    assert lie_pair_atiyah_cocycle(BottExtension(borel)) == CECochain(1, {(1,): {(2, 2, 2): 2}})


def test_borel_cocycle_class_independent_of_connection(borel):
    n1, n2 = BottExtension(borel, {(2, 2): {2: 5}}), BottExtension(borel)
    diff = lie_pair_atiyah_cocycle(n1) - lie_pair_atiyah_cocycle(n2)
    assert diff == ce_differential(borel, connection_difference(n1, n2), end_module(borel))


@given(st.integers(-4, 4), st.integers(-4, 4))
def test_affine_cocycle_class_independent(l1, l2):
    p = LiePairPoint(2, AFFINE, h=[0])
    n1, n2 = BottExtension(p, {(1, 1): {1: l1}}), BottExtension(p, {(1, 1): {1: l2}})
    diff = lie_pair_atiyah_cocycle(n1) - lie_pair_atiyah_cocycle(n2)
    assert diff == ce_differential(p, connection_difference(n1, n2), end_module(p))


def test_cocycle_independent_of_splitting(borel):
    nabla = BottExtension(borel, {(2, 2): {2: 5}})
    other = LiePairPoint(3, SL2, h=[0, 1], splitting={2: {2: 1, 1: 3}})
    same = BottExtension(other, {(2, 2): nabla.along(other.j({2: 1}), {2: 1})})
    assert lie_pair_atiyah_cocycle(same) == lie_pair_atiyah_cocycle(nabla)


def test_cocycle_needs_bott_extension(borel):
    class Broken(BottExtension):
        def along(self, l, e):
            return {2: Fraction(1)}

    with pytest.raises(PreconditionError):
        lie_pair_atiyah_cocycle(Broken(borel))


def test_end_module_is_a_representation(borel):
    assert check_representation(borel, end_module(borel), [{(2, 2, 2): Fraction(1)}])


def test_straightening_is_confluent(borel):
    for n in range(6):
        for w in itertools.product(range(3), repeat=n):
            assert straighten(borel, {w: 1}, "left") == straighten(borel, {w: 1}, "right")


@given(g_words)
def test_coproduct_matches_word_oracle(w):
    p = LiePairPoint(3, SL2, h=[0, 1])
    assert u_coproduct(p, UEnv(p).from_words({w: 1})) == u_coproduct_words(p, w)


@given(g_words, st.sampled_from([0, 1]))
def test_quotient_is_a_linear(w, a):
    p = LiePairPoint(3, SL2, h=[0, 1])
    v = UEnv(p).from_words({w: 1})
    assert a_action(p, {a: 1}, quotient_to_DpolyB(p, v)) == a_action_before_quotient(p, {a: 1}, v)


def test_a_action_requires_h(borel):
    with pytest.raises(ValueError):
        a_action(borel, {2: 1}, {(1,): 1})


def test_hochschild_on_short_words(borel):
    assert hochschild_d_B(borel, word((1,))) == {}
    assert hochschild_d_B(borel, {((), ()): Fraction(1)}) == {}


@given(b_elements)
def test_hochschild_squares_to_zero(x):
    p = LiePairPoint(3, SL2, h=[0, 1])
    assert hochschild_d_B(p, hochschild_d_B(p, x)) == {}


@given(b_elements, st.sampled_from([0, 1]))
def test_hochschild_commutes_with_action(x, a):
    p = LiePairPoint(3, SL2, h=[0, 1])
    assert hochschild_d_B(p, a_action_words(p, {a: 1}, x)) == a_action_words(p, {a: 1}, hochschild_d_B(p, x))


@given(b_elements, b_elements)
def test_hopf_axioms(x, y):
    p = LiePairPoint(3, SL2, h=[0, 1])
    assert all(dpoly_b(p).check_axioms(x, y).values())


def test_free_lie_membership(borel):
    assert in_free_lie_B(hochschild_d_B(borel, word((2,))))
    assert in_free_lie_B(hochschild_d_B(borel, free_bracket_B(word((1,)), word((2,)))))
    assert not in_free_lie_B(word((1,), (2,)))
    assert not in_free_lie_B({((), ()): Fraction(1)})


def test_free_bracket_of_letters():
    # both letters have degree 1, so the bracket is symmetric
    assert free_bracket_B(word((1,)), word((2,))) == {((), ((1,), (2,))): 1, ((), ((2,), (1,))): 1}
    assert free_bracket_B(word((1,)), word((1,))) == {((), ((1,), (1,))): 2}


def test_displayed_antipode_on_two_letters(borel):
    assert antipode_B_as_displayed(word((1,), (2,))) == {((), ((2,), (1,))): -1}
    assert antipode_B_as_displayed(word((1,), (2,))) == dpoly_b(borel).antipode(word((1,), (2,)))
    # the signs part ways at one letter, where only -p satisfies the antipode axiom
    assert antipode_B_as_displayed(word((1,))) == word((1,))
    assert dpoly_b(borel).antipode(word((1,))) == {((), ((1,),)): -1}


def test_coproduct_examples(affine):
    mono = UEnv(affine).from_words({(1, 1): 1})
    assert u_coproduct(affine, mono) == {((2, 0), (0, 0)): 1, ((1, 0), (1, 0)): 2, ((0, 0), (2, 0)): 1}
    assert u_coproduct(affine, UEnv(affine).one()) == {((0, 0), (0, 0)): 1}
