"""Named identity checks over a scene context.

A check draws one sample from an LCG and returns None on success or a
Failure holding the rendered input and the two unequal normal forms.  The
registry order is the stable public order of check names.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

from . import atiyah as at
from . import lie_pair_point as lp
from .corpus import (
    Bounds,
    is_homological,
    random_chain_morphism,
    random_connection,
    random_diffop,
    random_module,
    random_module_elt,
    random_poly,
    random_polydiffop,
    random_vector_field,
)
from .derivations import DiffOp, VectorField, apply, lie_bracket
from .free_lie import FreeLieElt, SymWord, is_in_free_lie, lie_bracket_free, pbw_sym_theta, r1_lhs, r1_rhs, theta
from .graded_algebra import Chart
from .lcg import LCG
from .poly_complex import (
    L_Q,
    PolyDiffOp,
    PolyVector,
    L_Q_polyvector,
    compose_all,
    coproduct_delta,
    cup,
    delta_appendix,
    evaluate,
    free_bracket,
    gerstenhaber_bracket,
    hkr,
    hochschild_d,
    hochschild_d_via_m,
    hopf_axioms,
)


@dataclass(frozen=True)
class Failure:
    input: str
    lhs: str
    rhs: str


class Skip(Exception):
    """Raised by a check whose preconditions the scene does not meet."""


@dataclass
class Context:
    chart: Chart
    q: VectorField
    bounds: Bounds = field(default_factory=Bounds)
    connections: dict = field(default_factory=dict)
    lie_pair: lp.LiePairPoint | None = None
    lie_connections: dict = field(default_factory=dict)
    lie_pair_error: str | None = None

    @cached_property
    def tangent(self) -> at.FreeDgModule:
        return at.tangent_shifted(self.chart, self.q)

    @cached_property
    def homological(self) -> bool:
        return is_homological(self.q)

    def require_homological(self):
        if not self.homological:
            raise Skip("Q is not homological")

    def connection(self, rng: LCG) -> at.Connection:
        """A scene connection, the flat one or a random one, chosen by the sample."""
        pool = list(self.connections.values()) + [at.flat_connection(self.tangent)]
        k = rng.randrange(len(pool) + 1)
        return pool[k] if k < len(pool) else random_connection(self.tangent, rng)


def _cmp(inp: str, lhs, rhs) -> Failure | None:
    return None if lhs == rhs else Failure(inp, str(lhs), str(rhs))


def _deg(rng: LCG) -> int:
    return rng.randint(-1, 1)


def _pd(ctx: Context, rng: LCG, max_arity: int | None = None) -> PolyDiffOp:
    top = ctx.bounds.max_arity if max_arity is None else max_arity
    n = rng.randint(0, top)
    return random_polydiffop(ctx.chart, n, n + _deg(rng), rng, ctx.bounds.max_order)


def _pd1(ctx: Context, rng: LCG, max_arity: int | None = None) -> PolyDiffOp:
    top = ctx.bounds.max_arity if max_arity is None else max_arity
    n = rng.randint(1, max(1, top))
    return random_polydiffop(ctx.chart, n, n + _deg(rng), rng, ctx.bounds.max_order)


def _field(ctx: Context, rng: LCG) -> VectorField:
    return random_vector_field(ctx.chart, _deg(rng), rng)


def _nonzero_field(ctx: Context, rng: LCG) -> VectorField:
    for _ in range(10):
        x = _field(ctx, rng)
        if not x.is_zero():
            return x
    return VectorField.coordinate(ctx.chart, rng.randrange(len(ctx.chart)))


def _diffop(ctx: Context, rng: LCG) -> DiffOp:
    return random_diffop(ctx.chart, _deg(rng), rng, ctx.bounds.max_order)


# ---------------------------------------------------------------------------
# D_poly checks


def check_homological(ctx: Context, rng: LCG):
    return _cmp(f"Q = {ctx.q}", lie_bracket(ctx.q, ctx.q), VectorField.zero(ctx.chart))


def check_hochschild_square(ctx: Context, rng: LCG):
    d = _pd(ctx, rng, ctx.bounds.max_arity - 1)
    return _cmp(f"D = {d}", hochschild_d(hochschild_d(d)), PolyDiffOp.zero(ctx.chart))


def check_dh_vs_bracket(ctx: Context, rng: LCG):
    d = _pd(ctx, rng)
    return _cmp(f"D = {d}", hochschild_d(d), hochschild_d_via_m(d))


def check_dh_lq(ctx: Context, rng: LCG):
    ctx.require_homological()
    z = PolyDiffOp.zero(ctx.chart)
    mq = gerstenhaber_bracket(PolyDiffOp.multiplication(ctx.chart), PolyDiffOp.from_vector_field(ctx.q))
    if not mq.is_zero():
        return Failure(f"[m, Q], Q = {ctx.q}", str(mq), "0")
    d = _pd(ctx, rng, ctx.bounds.max_arity - 1)
    return _cmp(f"D = {d}", hochschild_d(L_Q(ctx.q, d)) + L_Q(ctx.q, hochschild_d(d)), z)


def check_leibniz_cup(ctx: Context, rng: LCG):
    a = _pd(ctx, rng, 1)
    b = _pd(ctx, rng, 1)
    lhs = hochschild_d(cup(a, b))
    rhs = cup(hochschild_d(a), b) + cup(a, hochschild_d(b)).scale((-1) ** a.degree)
    return _cmp(f"D = {a}; E = {b}", lhs, rhs)


def check_jacobi(ctx: Context, rng: LCG):
    a, b, c = (_pd1(ctx, rng, 2) for _ in range(3))
    A, B = a.degree, b.degree
    br = gerstenhaber_bracket
    anti = br(b, a).scale(-((-1) ** ((A + 1) * (B + 1))))
    if br(a, b) != anti:
        return Failure(f"D = {a}; E = {b}", str(br(a, b)), str(anti))
    lhs = br(a, br(b, c))
    rhs = br(br(a, b), c) + br(b, br(a, c)).scale((-1) ** ((A + 1) * (B + 1)))
    return _cmp(f"D = {a}; E = {b}; F = {c}", lhs, rhs)


def check_delta_defining(ctx: Context, rng: LCG):
    d = _diffop(ctx, rng)
    f = random_poly(ctx.chart, _deg(rng), rng, 2)
    g = random_poly(ctx.chart, _deg(rng), rng, 2)
    lhs = evaluate(coproduct_delta(d), [f, g])
    rhs = apply(d, f * g).scale((-1) ** (f.degree + 1))
    return _cmp(f"D = {d}; f = {f}; g = {g}", lhs, rhs)


def check_delta_appendix(ctx: Context, rng: LCG):
    fields = [_nonzero_field(ctx, rng) for _ in range(rng.randint(1, 3))]
    lhs = delta_appendix(fields)
    rhs = coproduct_delta(compose_all(ctx.chart, fields))
    return _cmp("X = " + "; ".join(map(str, fields)), lhs, rhs)


def check_hopf_axioms(ctx: Context, rng: LCG):
    a, b = _pd(ctx, rng), _pd(ctx, rng, ctx.bounds.max_arity - 1)
    res = hopf_axioms(a, b)
    bad = sorted(k for k, v in res.items() if not v)
    return None if not bad else Failure(f"D = {a}; E = {b}", "failing: " + ", ".join(bad), "all axioms")


def _polyvector(ctx: Context, rng: LCG) -> PolyVector:
    return PolyVector.word(*[_nonzero_field(ctx, rng) for _ in range(rng.randint(1, 3))])


def check_pbw_hkr(ctx: Context, rng: LCG):
    v = _polyvector(ctx, rng)
    inp = "v = " + " . ".join(str(x) for x in v.words[0][1])
    h = hkr(v)
    if h != pbw_sym_theta(v):
        return Failure(inp, str(h), str(pbw_sym_theta(v)))
    if not hochschild_d(h).is_zero():
        return Failure(inp + " (d_H hkr)", str(hochschild_d(h)), "0")
    return _cmp(inp + " (hkr L_Q)", hkr(L_Q_polyvector(ctx.q, v)), L_Q(ctx.q, h))


def check_theta_membership(ctx: Context, rng: LCG):
    d = PolyDiffOp.from_diffop(_diffop(ctx, rng))
    dh = hochschild_d(d)
    if not is_in_free_lie(dh, 4):
        return Failure(f"D = {d}", f"d_H D = {dh} not in L", "member of L")
    x = _field(ctx, rng)
    return _cmp(f"X = {x}", L_Q(ctx.q, theta(x).value), theta(lie_bracket(ctx.q, x)).value)


def _generator(ctx: Context, rng: LCG) -> FreeLieElt:
    k = rng.randrange(4)
    if k == 0:
        return FreeLieElt.generator(PolyDiffOp.identity(ctx.chart))
    g = theta(_nonzero_field(ctx, rng))
    if k == 3:
        h = lie_bracket_free(g, theta(VectorField.coordinate(ctx.chart, rng.randrange(len(ctx.chart)))))
        if not h.value.is_zero():
            return h
    return g


def check_r1(ctx: Context, rng: LCG):
    s = SymWord([_generator(ctx, rng) for _ in range(rng.randint(0, 2))])
    g = _generator(ctx, rng)
    inp = f"s = {[str(x.value) for x in s.factors]}; g = {g.value}"
    return _cmp(inp, r1_lhs(s, g), r1_rhs(s, g))


# ---------------------------------------------------------------------------
# Atiyah checks


def check_atiyah_closed(ctx: Context, rng: LCG):
    ctx.require_homological()
    nabla = ctx.connection(rng)
    alpha = at.atiyah_cocycle(nabla, ctx.tangent)
    closed = at.hom_differential(alpha)
    if not closed.is_zero():
        return Failure(f"nabla = {dict(nabla.christoffel)}", str(closed.table), "0")
    x = random_vector_field(ctx.chart, _deg(rng), rng)
    xi = random_module_elt(ctx.tangent, _deg(rng) + 1, rng)
    lhs = alpha(at.shift_field(ctx.tangent, x), xi)
    return _cmp(f"X = {x}; xi = {xi}", lhs, at.atiyah_value(nabla, x, xi))


def check_class_independence(ctx: Context, rng: LCG):
    ctx.require_homological()
    n1, n2 = ctx.connection(rng), ctx.connection(rng)
    lhs, rhs = at.class_independence(n1, n2)
    return _cmp(f"nabla1 = {dict(n1.christoffel)}; nabla2 = {dict(n2.christoffel)}", lhs.table, rhs.table)


def check_tensor_cocycle(ctx: Context, rng: LCG):
    ctx.require_homological()
    n1 = ctx.connection(rng)
    mod2 = random_module(ctx.chart, ctx.q, rng.randint(1, 2), rng)
    n2 = random_connection(mod2, rng)
    lhs, rhs = at.tensor_cocycle(n1, n2)
    return _cmp(f"nabla1 = {dict(n1.christoffel)}; N2 = {mod2.basis_degrees}, nabla2 = {dict(n2.christoffel)}",
                lhs.table, rhs.table)


def check_functoriality(ctx: Context, rng: LCG):
    ctx.require_homological()
    if rng.randrange(2):
        src = tgt = ctx.tangent
        c = rng.randint(1, 3)
        phi = at.ModuleMorphism(src, tgt, tuple(src.basis(a).scale(c) for a in range(src.rank)))
        n1, n2 = ctx.connection(rng), ctx.connection(rng)
    else:
        src = random_module(ctx.chart, ctx.q, 2, rng)
        tgt = random_module(ctx.chart, ctx.q, 2, rng)
        phi = random_chain_morphism(src, tgt, rng)
        if not phi.is_chain_map():
            phi = at.ModuleMorphism(src, tgt, tuple(tgt.zero() for _ in range(src.rank)))
        n1, n2 = random_connection(src, rng), random_connection(tgt, rng)
    lhs, rhs = at.functoriality_homotopy(phi, n1, n2)
    return _cmp(f"phi = {[str(v) for v in phi.images]}", lhs.table, rhs.table)


def check_prop_bracket(ctx: Context, rng: LCG):
    ctx.require_homological()
    x = _field(ctx, rng)
    ds = [_diffop(ctx, rng) for _ in range(rng.randint(1, 2))]
    if at.check_prop_bracket(x, ds, ctx.q):
        return None
    p = at.cup_all(ctx.chart, [PolyDiffOp.from_diffop(d) for d in ds])
    return Failure(f"X = {x}; D = {[str(d) for d in ds]}", str(at.atiyah_dpoly(ctx.q, x, p)),
                   str(free_bracket(PolyDiffOp.from_vector_field(x), p)))


# ---------------------------------------------------------------------------
# Lie pair suite


def _b_word(pair: lp.LiePairPoint, rng: LCG, n: int) -> dict:
    nb = len(pair.complement)
    out: dict = {}
    for _ in range(rng.randint(1, 2)):
        w = tuple(tuple(rng.randint(0, 2) for _ in range(nb)) for _ in range(n))
        lp._add(out, ((), w), Fraction(rng.randint(-3, 3) or 1))
    return out


def _random_extension(pair: lp.LiePairPoint, rng: LCG) -> lp.BottExtension:
    table = {}
    for b in pair.complement:
        for e in pair.complement:
            if rng.randrange(2):
                table[(b, e)] = {k: Fraction(rng.randint(-3, 3)) for k in pair.complement}
    return lp.BottExtension(pair, table)


def check_liepair(ctx: Context, rng: LCG):
    if ctx.lie_pair_error:
        return Failure("lie_pair", ctx.lie_pair_error, "valid Lie pair")
    pair = ctx.lie_pair
    if pair is None:
        raise Skip("scene has no lie_pair block")
    w = tuple(rng.randrange(pair.dim) for _ in range(rng.randint(0, 5)))
    left, right = lp.straighten(pair, {w: 1}, "left"), lp.straighten(pair, {w: 1}, "right")
    if left != right:
        return Failure(f"PBW word {w}", str(left), str(right))
    u = lp.UEnv(pair)
    v = u.from_words({w: 1})
    if lp.u_coproduct(pair, v) != lp.u_coproduct_words(pair, w):
        return Failure(f"coproduct of {w}", str(lp.u_coproduct(pair, v)), str(lp.u_coproduct_words(pair, w)))
    if pair.h:
        a = {rng.choice(pair.h): Fraction(1)}
        lhs = lp.a_action(pair, a, lp.quotient_to_DpolyB(pair, v))
        rhs = lp.a_action_before_quotient(pair, a, v)
        if lhs != rhs:
            return Failure(f"a = {a}; v = {w}", str(lhs), str(rhs))
    if pair.complement:
        x = _b_word(pair, rng, rng.randint(0, 2))
        dx = lp.hochschild_d_B(pair, x)
        if lp.hochschild_d_B(pair, dx):
            return Failure(f"x = {x}", str(lp.hochschild_d_B(pair, dx)), "0")
        for a in pair.h:
            av = {a: Fraction(1)}
            l1 = lp.hochschild_d_B(pair, lp.a_action_words(pair, av, x))
            r1 = lp.a_action_words(pair, av, dx)
            if l1 != r1:
                return Failure(f"d_H vs action of e{a} on {x}", str(l1), str(r1))
        y = _b_word(pair, rng, rng.randint(0, 2))
        res = lp.dpoly_b(pair).check_axioms(x, y)
        if not all(res.values()):
            return Failure(f"x = {x}; y = {y}", str(res), "all Hopf axioms")
        if pair.h:
            b = rng.choice(pair.complement)
            a = {rng.choice(pair.h): Fraction(1)}
            shift = {k: Fraction(rng.randint(-2, 2)) for k in pair.h}
            lift = lp._lin(itertools.chain(pair.j({b: 1}).items(), shift.items()))
            if pair.bott(a, {b: 1}, lift) != pair.bott(a, {b: 1}):
                return Failure(f"lift {lift} of e{b}", str(pair.bott(a, {b: 1}, lift)), str(pair.bott(a, {b: 1})))
            pool = list(ctx.lie_connections.values())
            n1 = pool[rng.randrange(len(pool))] if pool and rng.randrange(2) else _random_extension(pair, rng)
            n2 = _random_extension(pair, rng)
            end = lp.end_module(pair)
            a1, a2 = lp.lie_pair_atiyah_cocycle(n1), lp.lie_pair_atiyah_cocycle(n2)
            d1 = lp.ce_differential(pair, a1, end)
            if not d1.is_zero():
                return Failure(f"nabla = {n1.table}", str(d1.values), "0")
            diff = lp.ce_differential(pair, lp.connection_difference(n1, n2), end)
            if a1 - a2 != diff:
                return Failure(f"nabla1 = {n1.table}; nabla2 = {n2.table}", str((a1 - a2).values), str(diff.values))
    return None


@dataclass(frozen=True)
class CheckSpec:
    name: str
    module: str
    run: Callable[[Context, LCG], Failure | None]
    deterministic: bool = False


REGISTRY: tuple[CheckSpec, ...] = (
    CheckSpec("homological", "derivations", check_homological, True),
    CheckSpec("hochschild-square", "poly_complex", check_hochschild_square),
    CheckSpec("dh-vs-bracket", "poly_complex", check_dh_vs_bracket),
    CheckSpec("dh-lq-anticommute", "poly_complex", check_dh_lq),
    CheckSpec("leibniz-cup", "poly_complex", check_leibniz_cup),
    CheckSpec("jacobi-gerstenhaber", "poly_complex", check_jacobi),
    CheckSpec("delta-defining", "poly_complex", check_delta_defining),
    CheckSpec("delta-appendix", "poly_complex", check_delta_appendix),
    CheckSpec("hopf-axioms", "poly_complex", check_hopf_axioms),
    CheckSpec("pbw-hkr-decomposition", "free_lie", check_pbw_hkr),
    CheckSpec("theta-membership", "free_lie", check_theta_membership),
    CheckSpec("r1-diagram", "free_lie", check_r1),
    CheckSpec("atiyah-cocycle-closed", "atiyah", check_atiyah_closed),
    CheckSpec("atiyah-class-independence", "atiyah", check_class_independence),
    CheckSpec("tensor-cocycle", "atiyah", check_tensor_cocycle),
    CheckSpec("functoriality-homotopy", "atiyah", check_functoriality),
    CheckSpec("prop-bracket", "atiyah", check_prop_bracket),
    CheckSpec("liepair-suite", "lie_pair_point", check_liepair),
)

BY_NAME = {c.name: c for c in REGISTRY}


def list_checks() -> list[str]:
    return [c.name for c in REGISTRY]


def run_sample(ctx: Context, name: str, sample_seed: int) -> Failure | None:
    return BY_NAME[name].run(ctx, LCG(sample_seed))
