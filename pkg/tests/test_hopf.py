from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from dgatlas.hopf import WordAlgebra

DEGREES = {"a": 0, "b": 1, "c": 2, "d": -1}
ALG = WordAlgebra((1, 0), DEGREES.__getitem__)  # coefficients in one odd and one even variable

letters = st.sampled_from(sorted(DEGREES))
coeff_monos = st.sampled_from([(0, 0), (1, 0), (0, 1), (1, 2)])
elements = st.dictionaries(st.tuples(coeff_monos, st.lists(letters, max_size=3).map(tuple)),
                           st.integers(-3, 3).filter(bool).map(Fraction), max_size=3)


def test_shuffle_of_single_letter():
    z = ALG.zero
    assert ALG.shuffle_coproduct({(z, ("b",)): 1}) == {(z, ("b",), ()): 1, (z, (), ("b",)): 1}


def test_unit_and_counit():
    assert ALG.counit(ALG.unit({(1, 0): 3})) == {(1, 0): 3}
    assert ALG.counit({((0, 0), ("a",)): 1}) == {}


def test_antipode_signs():
    z = ALG.zero
    assert ALG.antipode({(z, ("b",)): 1}) == {(z, ("b",)): -1}
    # two odd letters: (-1)^2 * kappa(reversal) = -1
    assert ALG.antipode({(z, ("b", "d")): 1}) == {(z, ("d", "b")): -1}
    assert ALG.reversal_as_displayed({(z, ("b",)): 1}) == {(z, ("b",)): 1}


def test_concat_moves_coefficients_left():
    z = ALG.zero
    # "b" followed by the odd coefficient: pulling it left past b costs a sign
    assert ALG.concat({(z, ("b",)): 1}, {((1, 0), ()): 1}) == {((1, 0), ("b",)): -1}


@given(elements, elements)
def test_axioms_hold(x, y):
    assert all(ALG.check_axioms(x, y).values())


@given(elements)
def test_graded_cocommutative(x):
    d = ALG.shuffle_coproduct(x)
    swapped: dict = {}
    for (a, u, v), c in d.items():
        s = -1 if (ALG.word_degree(u) * ALG.word_degree(v)) % 2 else 1
        swapped[(a, v, u)] = swapped.get((a, v, u), 0) + s * c
    assert {k: v for k, v in swapped.items() if v} == d


@given(elements)
def test_antipode_is_involutive(x):
    assert ALG.antipode(ALG.antipode(x)) == {k: v for k, v in x.items() if v}
