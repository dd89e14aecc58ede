from __future__ import annotations

import pytest
from hypothesis import given

from dgatlas import atiyah as at
from dgatlas.corpus import (
    random_chain_morphism,
    random_connection,
    random_diffop,
    random_module,
    random_module_elt,
    random_poly,
    random_vector_field,
)
from dgatlas.derivations import DiffOp, PreconditionError, VectorField, compose
from dgatlas.graded_algebra import ChartMismatch, Poly
from dgatlas.lcg import LCG
from dgatlas.poly_complex import PolyDiffOp, coproduct_delta, cup, free_bracket
from support import G1, MIXED, P, g1_q, mixed_q, seeds, vf

T_MIXED = at.tangent_shifted(MIXED, mixed_q())
T_G1 = at.tangent_shifted(G1, g1_q())


def bent() -> at.Connection:
    """A non-flat connection on the shifted tangent module of the mixed chart."""
    z = P("0")
    return at.Connection(T_MIXED, {(0, 1): T_MIXED.element([z, P("x"), z]),
                                   (1, 2): T_MIXED.element([P("xi*eta"), z, z])})


def sample_connection(rng: LCG) -> at.Connection:
    return [at.flat_connection(T_MIXED), bent(), random_connection(T_MIXED, rng)][rng.randrange(3)]


# ---------------------------------------------------------------------------
# modules and connections


def test_tangent_module_shape():
    assert T_MIXED.basis_names == ("dbar_x", "dbar_xi", "dbar_eta")
    assert T_MIXED.basis_degrees == (1, 0, 2)
    assert T_MIXED.is_dg() and T_G1.is_dg()


def test_lq_on_module_is_leibniz():
    rng = LCG(4)
    xi = random_module_elt(T_MIXED, 1, rng)
    f = P("x*xi + eta")
    f = f.homogeneous_parts()[1]
    assert T_MIXED.L_Q(f * xi) == mixed_q()(f) * xi + (f * T_MIXED.L_Q(xi)).scale(-1)


def test_connection_degree_is_validated():
    with pytest.raises(ValueError):
        at.Connection(T_MIXED, {(0, 0): T_MIXED.element([P("xi"), P("0"), P("0")])})
    with pytest.raises(ChartMismatch):
        at.Connection(T_MIXED, {(0, 0): T_G1.basis(0)})


def test_g1_admits_only_the_flat_connection_by_degree():
    # Gamma(i, a) needs degree |e_a| - |xi_i| = -1, and no polynomial on g[1] has negative degree
    for i in range(2):
        for a in range(2):
            with pytest.raises(ValueError):
                at.Connection(T_G1, {(i, a): T_G1.element([P("1", G1), P("0", G1)])})


@given(seeds)
def test_connection_is_function_linear_and_leibniz(seed):
    rng = LCG(seed)
    n = sample_connection(rng)
    x = random_vector_field(MIXED, rng.randint(-1, 1), rng)
    xi = random_module_elt(T_MIXED, rng.randint(-1, 1), rng)
    f = random_poly(MIXED, rng.randint(-1, 1), rng, 2)
    if f.is_zero() or x.is_zero():
        return
    assert n(f * x, xi) == f * n(x, xi)
    assert n(x, f * xi) == x(f) * xi + (f * n(x, xi)).scale((-1) ** (f.degree * x.degree))


# ---------------------------------------------------------------------------
# jets and splittings


def test_jet_sequence_is_exact():
    for mod in (T_MIXED, T_G1, random_module(MIXED, mixed_q(), 3, LCG(2))):
        assert all(at.JetExtension(mod).exactness().values())


def test_flat_splitting_is_identity_on_tensors():
    s = at.splitting_from_connection(at.flat_connection(T_MIXED))
    jet = at.JetExtension(T_MIXED)
    x, xi = vf(MIXED, xi="x", eta="1"), T_MIXED.element([P("xi"), P("x"), P("eta*xi")])
    tab = jet.tangent_tensor(x, xi)
    assert s(tab) == (tab, T_MIXED.zero())


def test_splitting_roundtrip():
    n = bent()
    back = at.connection_from_splitting(T_MIXED, at.splitting_from_connection(n))
    assert back.christoffel == n.christoffel


@given(seeds)
def test_splitting_is_a_section_of_j(seed):
    rng = LCG(seed)
    n = sample_connection(rng)
    jet = at.JetExtension(T_MIXED)
    x = random_vector_field(MIXED, rng.randint(-1, 1), rng)
    xi = random_module_elt(T_MIXED, rng.randint(-1, 1), rng)
    s = at.splitting_from_connection(n)
    tab = jet.tangent_tensor(x, xi)
    assert jet.j(s(tab)) == tab
    assert s(tab) == at.split_direct(n, x, xi)


# ---------------------------------------------------------------------------
# Atiyah cocycle


def test_zero_q_gives_zero_cocycle():
    t = at.tangent_shifted(MIXED, VectorField.zero(MIXED))
    n = at.Connection(t, {(0, 1): t.element([P("0"), P("x"), P("0")])})
    assert at.atiyah_cocycle(n, t).is_zero()


def test_g1_cocycle_reproduces_structure_constants():
    alpha = at.atiyah_cocycle(at.flat_connection(T_G1), T_G1)
    # alpha(dbar_i, dbar_j) = -c^2_{ij} dbar_2 for the only bracket [e1, e2] = e2
    assert alpha.table == {(0, 1): T_G1.basis(1).scale(-1), (1, 0): T_G1.basis(1)}
    assert at.hom_differential(alpha).is_zero()


def test_mixed_flat_cocycle_value():
    alpha = at.atiyah_cocycle(at.flat_connection(T_MIXED), T_MIXED)
    assert alpha.table == {(1, 2): T_MIXED.basis(2), (2, 1): T_MIXED.basis(2).scale(-1)}


@given(seeds)
def test_cocycle_is_closed_and_bilinear(seed):
    rng = LCG(seed)
    n = sample_connection(rng)
    alpha = at.atiyah_cocycle(n, T_MIXED)
    assert at.hom_differential(alpha).is_zero()
    x = random_vector_field(MIXED, rng.randint(-1, 1), rng)
    xi = random_module_elt(T_MIXED, rng.randint(-1, 1), rng)
    f = random_poly(MIXED, rng.randint(-1, 1), rng, 2)
    assert alpha(at.shift_field(T_MIXED, x), xi) == at.atiyah_value(n, x, xi)
    if f.is_zero() or x.is_zero():
        return
    base = at.atiyah_value(n, x, xi)
    assert at.atiyah_value(n, f * x, xi) == f * base
    assert at.atiyah_value(n, x, f * xi) == (f * base).scale((-1) ** (f.degree * (x.degree + 1)))


@given(seeds)
def test_class_independence(seed):
    rng = LCG(seed)
    lhs, rhs = at.class_independence(sample_connection(rng), sample_connection(rng))
    assert lhs == rhs


def test_hom_differential_examples():
    t = at.tangent_shifted(MIXED, VectorField.zero(MIXED))
    const = at.HomCochain([t], t, 0, {(0,): t.basis(1), (2,): t.basis(0).scale(3)})
    assert at.hom_differential(const).is_zero()


@given(seeds)
def test_hom_differential_squares_to_zero(seed):
    rng = LCG(seed)
    deg = rng.randint(-1, 1)
    table = {}
    for a in range(T_MIXED.rank):
        for b in range(T_MIXED.rank):
            target = T_MIXED.basis_degrees[a] + T_MIXED.basis_degrees[b] + deg
            table[(a, b)] = random_module_elt(T_MIXED, target, rng)
    phi = at.HomCochain([T_MIXED, T_MIXED], T_MIXED, deg, table)
    assert at.hom_differential(at.hom_differential(phi)).is_zero()


def test_tensor_cocycle_examples():
    t0 = at.tangent_shifted(MIXED, VectorField.zero(MIXED))
    lhs, rhs = at.tensor_cocycle(at.flat_connection(t0), at.flat_connection(t0))
    assert lhs.is_zero() and rhs.is_zero()
    lhs, rhs = at.tensor_cocycle(at.flat_connection(T_G1), at.flat_connection(T_G1))
    assert lhs == rhs and not lhs.is_zero()


def test_tensor_cocycle_with_inert_second_factor():
    n2 = at.flat_connection(random_module(MIXED, mixed_q(), 2, LCG(8)))
    lhs, rhs = at.tensor_cocycle(bent(), n2)
    assert lhs == rhs
    assert all(at.atiyah_value(n2, VectorField.coordinate(MIXED, i), n2.module.basis(b)).is_zero()
               for i in range(3) for b in range(2))


@given(seeds)
def test_tensor_cocycle_random(seed):
    rng = LCG(seed)
    mod2 = random_module(MIXED, mixed_q(), rng.randint(1, 2), rng)
    lhs, rhs = at.tensor_cocycle(sample_connection(rng), random_connection(mod2, rng))
    assert lhs == rhs


def test_functoriality_identity_cases():
    ident = at.ModuleMorphism(T_MIXED, T_MIXED, tuple(T_MIXED.basis(a) for a in range(3)))
    flat = at.flat_connection(T_MIXED)
    lhs, rhs = at.functoriality_homotopy(ident, flat, flat)
    assert lhs.is_zero() and rhs.is_zero()
    lhs, rhs = at.functoriality_homotopy(ident, bent(), flat)
    ci = at.class_independence(bent(), flat)
    assert lhs == rhs == ci[0]


@given(seeds)
def test_functoriality_random_morphisms(seed):
    rng = LCG(seed)
    src = random_module(G1, g1_q(), 2, rng)
    tgt = random_module(G1, g1_q(), 2, rng)
    phi = random_chain_morphism(src, tgt, rng)
    if not phi.is_chain_map():
        return
    lhs, rhs = at.functoriality_homotopy(phi, random_connection(src, rng), random_connection(tgt, rng))
    assert lhs == rhs


def test_functoriality_requires_chain_map():
    src = at.FreeDgModule(MIXED, [("e", 2)], mixed_q())
    phi = at.ModuleMorphism(src, T_MIXED, (T_MIXED.basis(2),))
    assert not phi.is_chain_map()
    with pytest.raises(PreconditionError):
        at.functoriality_homotopy(phi, at.flat_connection(src), at.flat_connection(T_MIXED))


# ---------------------------------------------------------------------------
# canonical connection and the bracket


def test_canonical_connection_on_identity_and_functions():
    x = vf(MIXED, xi="x", eta="1")
    assert at.canonical_connection(x, PolyDiffOp.identity(MIXED)) == PolyDiffOp.from_vector_field(x)
    f = P("x*xi")
    assert at.canonical_connection(x, PolyDiffOp.from_function(f)) == PolyDiffOp.from_function(x(f))


def test_canonical_connection_factorwise_sign():
    x = VectorField.coordinate(MIXED, "xi")  # degree -1, total 0
    d1, d2 = DiffOp.partial(MIXED, "x"), DiffOp.partial(MIXED, "eta")  # total degrees 1, 2
    got = at.canonical_connection(x, PolyDiffOp.tensor(d1, d2))
    xd = x.as_diffop()
    expected = PolyDiffOp.tensor(compose(xd, d1), d2) + PolyDiffOp.tensor(d1, compose(xd, d2)).scale(
        (-1) ** (x.degree * 1))
    assert got == expected


@given(seeds)
def test_canonical_connection_commutes_with_delta(seed):
    rng = LCG(seed)
    x = random_vector_field(MIXED, rng.randint(-1, 1), rng)
    d = random_diffop(MIXED, rng.randint(-1, 1), rng)
    lhs = at.canonical_connection(x, coproduct_delta(d))
    assert lhs == coproduct_delta(compose(x.as_diffop(), d))


def test_prop_bracket_examples():
    zero = VectorField.zero(MIXED)
    x = vf(MIXED, x="xi")
    assert at.check_prop_bracket(x, [DiffOp.partial(MIXED, "x")], zero)
    vert, horiz = at.atiyah_dpoly_parts(zero, x, PolyDiffOp.from_diffop(DiffOp.partial(MIXED, "x")))
    assert vert.is_zero() and not horiz.is_zero()
    for i in range(2):
        for j in range(2):
            assert at.check_prop_bracket(VectorField.coordinate(G1, i), [DiffOp.partial(G1, j)], g1_q())
    ds = [DiffOp.partial(MIXED, "xi"), vf(MIXED, x="xi").as_diffop()]
    assert at.check_prop_bracket(vf(MIXED, eta="x"), ds, mixed_q())


@given(seeds)
def test_prop_bracket_random(seed):
    rng = LCG(seed)
    x = random_vector_field(MIXED, rng.randint(-1, 1), rng)
    ds = [random_diffop(MIXED, rng.randint(-1, 1), rng) for _ in range(rng.randint(1, 2))]
    assert at.check_prop_bracket(x, ds, mixed_q())


def test_bracket_on_cup_words_matches_free_bracket():
    x = vf(MIXED, xi="x*x")
    p = cup(PolyDiffOp.from_diffop(DiffOp.partial(MIXED, "x")), PolyDiffOp.from_diffop(DiffOp.partial(MIXED, "eta")))
    assert at.atiyah_dpoly(mixed_q(), x, p) == free_bracket(PolyDiffOp.from_vector_field(x), p)


@pytest.mark.parametrize("name", ["flat", "bent"])
def test_main_diagram(name):
    n = at.flat_connection(T_MIXED) if name == "flat" else bent()
    xs = [VectorField.coordinate(MIXED, 0), vf(MIXED, xi="x"), vf(MIXED, x="eta")]
    ys = [VectorField.coordinate(MIXED, 1), vf(MIXED, eta="x*x")]
    for x in xs:
        for y in ys:
            lhs, rhs = at.main_diagram_sides(mixed_q(), n, x, y)
            assert lhs == rhs


def test_cup_all_of_nothing_is_unit():
    assert at.cup_all(MIXED, []) == PolyDiffOp.from_function(Poly.const(MIXED, 1))
