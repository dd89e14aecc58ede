"""Lie algebra pairs h in g over a point.

g has basis e_0..e_{n-1} and rational structure constants.  U(g) is stored
on PBW monomials for the order "complement first, h last" so that the
quotient U(g)/U(g)h has the complement monomials as a basis.  The complex
D_poly(B) reuses the tensor-word Hopf engine with every letter of degree 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Mapping, Sequence

from .derivations import PreconditionError, VectorField
from .free_lie import bracket_span_solve
from .graded_algebra import Chart, Poly
from .hopf import WordAlgebra

Vec = dict  # basis index -> Fraction
UElt = dict  # exponent tuple (in PBW order positions) -> Fraction
BElt = dict  # ((), word of B-monomials) -> Fraction, as in WordAlgebra


def _add(out: dict, key, value):
    v = out.get(key, 0) + value
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def _lin(pairs) -> dict:
    out: dict = {}
    for k, v in pairs:
        _add(out, k, v)
    return out


class LiePairPoint:
    """Structure constants c[(i, j)] = {k: c^k_ij}, h as an index subset, splitting j."""

    def __init__(self, dim: int, brackets: Mapping[tuple[int, int], Mapping[int, object]],
                 h: Sequence[int], splitting: Mapping[int, Mapping[int, object]] | None = None):
        self.dim = dim
        c: dict = {}
        for (i, j), v in brackets.items():
            vec = {k: Fraction(x) for k, x in v.items() if x}
            if vec:
                c[(i, j)] = vec
                c[(j, i)] = {k: -x for k, x in vec.items()}
        for (i, j) in list(c):
            if i == j:
                raise ValueError("[e_i, e_i] must vanish")
        self.c = c
        self.h = tuple(sorted(h))
        self.complement = tuple(i for i in range(dim) if i not in self.h)
        self.order = self.complement + self.h
        self.pos = {b: p for p, b in enumerate(self.order)}
        j = splitting or {}
        self.splitting = {b: {k: Fraction(x) for k, x in j.get(b, {b: 1}).items() if x} for b in self.complement}
        self._check()

    # structure -----------------------------------------------------------------
    def bracket(self, x: Vec, y: Vec) -> Vec:
        out: dict = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, v in self.c.get((i, j), {}).items():
                    _add(out, k, a * b * v)
        return out

    def jacobi_defect(self) -> list[tuple[int, int, int, Vec]]:
        bad = []
        e = lambda i: {i: Fraction(1)}
        for i, j, k in itertools.combinations(range(self.dim), 3):
            s = _lin(itertools.chain(
                self.bracket(e(i), self.bracket(e(j), e(k))).items(),
                self.bracket(e(j), self.bracket(e(k), e(i))).items(),
                self.bracket(e(k), self.bracket(e(i), e(j))).items()))
            if s:
                bad.append((i, j, k, s))
        return bad

    def _check(self):
        if self.jacobi_defect():
            raise PreconditionError("structure constants violate the Jacobi identity")
        for a, b in itertools.combinations(self.h, 2):
            if set(self.bracket({a: 1}, {b: 1})) - set(self.h):
                raise PreconditionError("h is not closed under the bracket")
        for b, v in self.splitting.items():
            if self.pr_B(v) != {b: 1}:
                raise PreconditionError("splitting is not a section of pr_B")

    def pr_B(self, x: Vec) -> Vec:
        return {k: v for k, v in x.items() if k not in self.h and v}

    def j(self, b: Vec) -> Vec:
        return _lin((k, c * v) for bi, c in b.items() for k, v in self.splitting[bi].items())

    def h_part(self, x: Vec) -> Vec:
        return {k: v for k, v in x.items() if k in self.h and v}

    def split(self, x: Vec) -> tuple[Vec, Vec]:
        """x = i(a) + j(b); returns (a, b)."""
        b = self.pr_B(x)
        a = _lin(itertools.chain(x.items(), ((k, -v) for k, v in self.j(b).items())))
        return a, b

    # Bott connection -------------------------------------------------------------
    def bott(self, a: Vec, b: Vec, lift: Vec | None = None) -> Vec:
        """pr_B [a, l] with pr_B(l) = b; the lift defaults to j(b)."""
        l = self.j(b) if lift is None else lift
        if self.pr_B(l) != {k: v for k, v in b.items() if v}:
            raise ValueError("lift does not project to b")
        if set(a) - set(self.h):
            raise ValueError("Bott connection is defined for a in h")
        return self.pr_B(self.bracket(a, l))


# ---------------------------------------------------------------------------
# U(g) on PBW monomials


def _word_to_mono(pair: LiePairPoint, word: Sequence[int]) -> tuple[int, ...]:
    exps = [0] * pair.dim
    for b in word:
        exps[pair.pos[b]] += 1
    return tuple(exps)


def _mono_to_word(pair: LiePairPoint, mono: Sequence[int]) -> tuple[int, ...]:
    return tuple(b for p, b in enumerate(pair.order) for _ in range(mono[p]))


def straighten(pair: LiePairPoint, words: Mapping[tuple[int, ...], object], strategy: str = "left") -> UElt:
    """Normal form of a combination of words via e_b e_a -> e_a e_b + [e_b, e_a] for a before b."""
    pending = {tuple(w): Fraction(c) for w, c in words.items() if c}
    out: UElt = {}
    steps = 0
    while pending:
        w, c = pending.popitem()
        inv = [k for k in range(len(w) - 1) if pair.pos[w[k]] > pair.pos[w[k + 1]]]
        if not inv:
            _add(out, _word_to_mono(pair, w), c)
            continue
        steps += 1
        k = inv[0] if strategy == "left" else inv[-1]
        b, a = w[k], w[k + 1]
        _add(pending, w[:k] + (a, b) + w[k + 2:], c)
        for m, v in pair.c.get((b, a), {}).items():
            _add(pending, w[:k] + (m,) + w[k + 2:], c * v)
    return out


class UEnv:
    """U(g) with PBW normal form for one Lie pair."""

    def __init__(self, pair: LiePairPoint):
        self.pair = pair

    def one(self) -> UElt:
        return {(0,) * self.pair.dim: Fraction(1)}

    def gen(self, b: int) -> UElt:
        return {_word_to_mono(self.pair, (b,)): Fraction(1)}

    def from_vec(self, x: Vec) -> UElt:
        return _lin((_word_to_mono(self.pair, (b,)), v) for b, v in x.items())

    def from_words(self, words: Mapping[tuple[int, ...], object], strategy: str = "left") -> UElt:
        return straighten(self.pair, words, strategy)

    def mul(self, u: UElt, v: UElt) -> UElt:
        words: dict = {}
        for a, x in u.items():
            wa = _mono_to_word(self.pair, a)
            for b, y in v.items():
                _add(words, wa + _mono_to_word(self.pair, b), x * y)
        return straighten(self.pair, words)


def u_coproduct(pair: LiePairPoint, u: UElt) -> dict:
    """Delta on PBW monomials: the binomial expansion, keys (left mono, right mono)."""
    out: dict = {}
    for mono, c in u.items():
        ranges = [range(e + 1) for e in mono]
        for left in itertools.product(*ranges):
            right = tuple(e - l for e, l in zip(mono, left))
            k = 1
            for e, l in zip(mono, left):
                k *= comb(e, l)
            _add(out, (left, right), c * k)
    return out


def u_coproduct_words(pair: LiePairPoint, word: Sequence[int]) -> dict:
    """Delta as an algebra map on a word, straightened afterwards; the oracle for u_coproduct."""
    acc: dict = {((), ()): Fraction(1)}
    for b in word:
        nxt: dict = {}
        for (l, r), c in acc.items():
            _add(nxt, (l + (b,), r), c)
            _add(nxt, (l, r + (b,)), c)
        acc = nxt
    out: dict = {}
    for (l, r), c in acc.items():
        for lm, x in straighten(pair, {l: 1}).items():
            for rm, y in straighten(pair, {r: 1}).items():
                _add(out, (lm, rm), c * x * y)
    return out


# ---------------------------------------------------------------------------
# D^1_poly(B) = U(g)/U(g)h and D_poly(B)


def _b_mono(pair: LiePairPoint, mono: Sequence[int]) -> tuple[int, ...]:
    return tuple(mono[: len(pair.complement)])


def quotient_to_DpolyB(pair: LiePairPoint, u: UElt) -> dict:
    """Kill PBW monomials with a trailing h-factor; keys are exponent tuples over the complement."""
    nb = len(pair.complement)
    out: dict = {}
    for mono, c in u.items():
        if any(mono[nb:]):
            continue
        _add(out, _b_mono(pair, mono), c)
    return out


def lift_from_DpolyB(pair: LiePairPoint, p: Mapping[tuple[int, ...], object]) -> UElt:
    nh = len(pair.h)
    return {tuple(m) + (0,) * nh: Fraction(c) for m, c in p.items() if c}


def a_action(pair: LiePairPoint, a: Vec, p: Mapping) -> dict:
    """a . [v] = [a v] for a in h on D^1_poly(B)."""
    if set(a) - set(pair.h):
        raise ValueError("action is defined for a in h")
    u = UEnv(pair)
    return quotient_to_DpolyB(pair, u.mul(u.from_vec(a), lift_from_DpolyB(pair, p)))


def a_action_before_quotient(pair: LiePairPoint, a: Vec, v: UElt) -> dict:
    u = UEnv(pair)
    return quotient_to_DpolyB(pair, u.mul(u.from_vec(a), v))


def dpoly_b(pair: LiePairPoint) -> WordAlgebra:
    """Tensor words over B-monomials, letters in degree +1, scalar coefficients."""
    return WordAlgebra((), lambda letter: 1)


def word(*letters) -> BElt:
    return {((), tuple(letters)): Fraction(1)}


def letter_coproduct(pair: LiePairPoint, p: tuple[int, ...]) -> dict:
    """Delta on a B-monomial of D^1_poly(B), keys (left letter, right letter)."""
    nh = len(pair.h)
    out: dict = {}
    for (l, r), c in u_coproduct(pair, {tuple(p) + (0,) * nh: 1}).items():
        _add(out, (_b_mono(pair, l), _b_mono(pair, r)), c)
    return out


def hochschild_d_B(pair: LiePairPoint, x: BElt) -> BElt:
    """-(1 (x) p - Delta(p_1) (x) ... + ... + (-1)^n p (x) Delta(p_n) + (-1)^{n+1} p (x) 1)."""
    one = (0,) * len(pair.complement)
    out: BElt = {}
    for (z, w), c in x.items():
        n = len(w)
        _add(out, (z, (one,) + w), -c)
        for i in range(n):
            for (l, r), k in letter_coproduct(pair, w[i]).items():
                _add(out, (z, w[:i] + (l, r) + w[i + 1:]), -c * k * (-1) ** (i + 1))
        _add(out, (z, w + (one,)), -c * (-1) ** (n + 1))
    return out


def a_action_words(pair: LiePairPoint, a: Vec, x: BElt) -> BElt:
    """The A-module structure on D^n_poly(B): a acts on one tensor factor at a time."""
    out: BElt = {}
    for (z, w), c in x.items():
        for i, p in enumerate(w):
            for q, k in a_action(pair, a, {p: 1}).items():
                _add(out, (z, w[:i] + (q,) + w[i + 1:]), c * k)
    return out


def free_bracket_B(x: BElt, y: BElt) -> BElt:
    """[[u, v]] = u (x) v - (-1)^{ij} v (x) u on words of arity i, j."""
    alg = WordAlgebra((), lambda letter: 1)
    out: BElt = {}
    for k, v in alg.concat(x, y).items():
        _add(out, k, v)
    for (z1, u), a in x.items():
        for (z2, w), b in y.items():
            _add(out, ((), w + u), -a * b * (-1) ** (len(u) * len(w)))
    return out


def in_free_lie_B(x: BElt) -> bool:
    """Membership in L(D^1_poly(B)) by the shared bracket-span solver."""
    if any(not w for (_, w) in x):
        return False
    groups: dict = {}
    for (_, w), c in x.items():
        groups.setdefault(tuple(sorted(w)), {})[w] = c
    return all(bracket_span_solve(t, lambda letter: 1) is not None for t in groups.values())


def hopf_maps_B(pair: LiePairPoint):
    """(product, coproduct, unit, counit, antipode) on D_poly(B)."""
    alg = dpoly_b(pair)
    return alg.concat, alg.shuffle_coproduct, alg.unit, alg.counit, alg.antipode


def antipode_B_as_displayed(x: BElt) -> BElt:
    """(-1)^{n(n-1)/2} times the reversed word."""
    out: BElt = {}
    for (z, w), c in x.items():
        n = len(w)
        _add(out, (z, tuple(reversed(w))), c * (-1) ** (n * (n - 1) // 2))
    return out


# ---------------------------------------------------------------------------
# Chevalley-Eilenberg cochains of h


@dataclass(frozen=True)
class CEModule:
    """A representation of h on dict-valued vectors; ``act(i, v)`` for the h-basis index i."""

    act: Callable[[int, dict], dict]
    name: str = ""


@dataclass(frozen=True)
class CECochain:
    """k-cochain on h: increasing tuples of h-basis indices -> module vectors."""

    k: int
    values: Mapping[tuple[int, ...], dict] = field(default_factory=dict)

    def value(self, idx: tuple[int, ...]) -> dict:
        if len(set(idx)) < len(idx):
            return {}
        order = sorted(range(len(idx)), key=lambda t: idx[t])
        inv = sum(1 for s, t in itertools.combinations(range(len(idx)), 2) if order[s] > order[t])
        v = self.values.get(tuple(sorted(idx)), {})
        return {key: c * (-1) ** inv for key, c in v.items()}

    def is_zero(self) -> bool:
        return all(not v for v in self.values.values())

    def __sub__(self, other: "CECochain") -> "CECochain":
        keys = set(self.values) | set(other.values)
        return CECochain(self.k, {i: _lin(itertools.chain(
            self.values.get(i, {}).items(), ((a, -b) for a, b in other.values.get(i, {}).items()))) for i in keys})

    def normalized(self) -> "CECochain":
        return CECochain(self.k, {i: v for i, v in self.values.items() if v})

    def __eq__(self, other):
        return isinstance(other, CECochain) and self.k == other.k and \
            self.normalized().values == other.normalized().values


def check_representation(pair: LiePairPoint, module: CEModule, samples: Sequence[dict]) -> bool:
    for a, b in itertools.combinations(pair.h, 2):
        br = pair.bracket({a: 1}, {b: 1})
        for v in samples:
            lhs = _lin(itertools.chain(module.act(a, module.act(b, v)).items(),
                                       ((k, -c) for k, c in module.act(b, module.act(a, v)).items())))
            rhs: dict = {}
            for m, c in br.items():
                for k, x in module.act(m, v).items():
                    _add(rhs, k, c * x)
            if lhs != rhs:
                return False
    return True


def ce_differential(pair: LiePairPoint, phi: CECochain, module: CEModule,
                    samples: Sequence[dict] | None = None) -> CECochain:
    """(d phi)(a_0..a_k) = sum (-1)^i a_i.phi(..^a_i..) + sum_{i<j} (-1)^{i+j} phi([a_i,a_j], ..)."""
    if samples is not None and not check_representation(pair, module, samples):
        raise PreconditionError("the action is not a representation of h")
    k = phi.k
    out = {}
    for idx in itertools.combinations(pair.h, k + 1):
        acc: dict = {}
        for i, a in enumerate(idx):
            rest = idx[:i] + idx[i + 1:]
            for key, c in module.act(a, phi.value(rest)).items():
                _add(acc, key, c * (-1) ** i)
        for i, j in itertools.combinations(range(k + 1), 2):
            rest = tuple(x for t, x in enumerate(idx) if t not in (i, j))
            for m, c in pair.bracket({idx[i]: 1}, {idx[j]: 1}).items():
                for key, v in phi.value((m,) + rest).items():
                    _add(acc, key, c * v * (-1) ** (i + j))
        out[idx] = acc
    return CECochain(k + 1, out)


def ce_map(phi: CECochain, f: Callable[[dict], dict]) -> CECochain:
    return CECochain(phi.k, {i: f(v) for i, v in phi.values.items()})


def bott_module(pair: LiePairPoint) -> CEModule:
    return CEModule(lambda a, v: pair.bott({a: Fraction(1)}, v), "B")


def dpoly_module(pair: LiePairPoint) -> CEModule:
    return CEModule(lambda a, x: a_action_words(pair, {a: Fraction(1)}, x), "D_poly(B)")


# ---------------------------------------------------------------------------
# connections extending Bott and the Lie-pair Atiyah cocycle


class BottExtension:
    """An L-connection on B with nabla_{i(a)} = Bott; ``table[(b, e)]`` gives nabla_{j(b)} e."""

    def __init__(self, pair: LiePairPoint, table: Mapping[tuple[int, int], Mapping[int, object]] | None = None):
        self.pair = pair
        self.table = {k: {m: Fraction(x) for m, x in v.items() if x} for k, v in (table or {}).items()}
        for (b, e) in self.table:
            if b not in pair.complement or e not in pair.complement:
                raise ValueError("connection table must be indexed by complement basis pairs")

    def along(self, l: Vec, e: Vec) -> Vec:
        a, b = self.pair.split(l)
        out = _lin(self.pair.bott(a, e).items()) if a else {}
        for bi, x in b.items():
            for ei, y in e.items():
                for m, z in self.table.get((bi, ei), {}).items():
                    _add(out, m, x * y * z)
        return out

    def check_extends_bott(self) -> bool:
        return all(self.along({a: 1}, {e: 1}) == self.pair.bott({a: 1}, {e: 1})
                   for a in self.pair.h for e in self.pair.complement)


def lie_pair_atiyah_value(nabla: BottExtension, a: Vec, b: Vec, e: Vec) -> Vec:
    p = nabla.pair
    jb = p.j(b)
    t1 = p.bott(a, nabla.along(jb, e))
    t2 = nabla.along(jb, p.bott(a, e))
    t3 = nabla.along(p.bracket(a, jb), e)
    return _lin(itertools.chain(t1.items(), ((k, -v) for k, v in t2.items()), ((k, -v) for k, v in t3.items())))


def end_module(pair: LiePairPoint) -> CEModule:
    """h acting on B^v (x) End(B) stored as {(b, e, k): c} meaning T(b, e) has k-component c."""

    def act(a: int, t: dict) -> dict:
        av = {a: Fraction(1)}
        out: dict = {}
        for (b, e, k), c in t.items():
            for m, x in pair.bott(av, {k: 1}).items():
                _add(out, (b, e, m), c * x)
        for b in pair.complement:
            for e in pair.complement:
                for bb, x in pair.bott(av, {b: 1}).items():
                    for (b2, e2, k), c in t.items():
                        if b2 == bb and e2 == e:
                            _add(out, (b, e, k), -x * c)
                for ee, x in pair.bott(av, {e: 1}).items():
                    for (b2, e2, k), c in t.items():
                        if b2 == b and e2 == ee:
                            _add(out, (b, e, k), -x * c)
        return out

    return CEModule(act, "B^v (x) End(B)")


def lie_pair_atiyah_cocycle(nabla: BottExtension) -> CECochain:
    if not nabla.check_extends_bott():
        raise PreconditionError("connection does not extend the Bott connection")
    p = nabla.pair
    vals = {}
    for a in p.h:
        t: dict = {}
        for b in p.complement:
            for e in p.complement:
                for k, c in lie_pair_atiyah_value(nabla, {a: 1}, {b: 1}, {e: 1}).items():
                    _add(t, (b, e, k), c)
        vals[(a,)] = t
    return CECochain(1, vals)


def connection_difference(n1: BottExtension, n2: BottExtension) -> CECochain:
    """The 0-cochain S(b, e) = (nabla_1 - nabla_2)_{j(b)} e in B^v (x) End(B)."""
    p = n1.pair
    t: dict = {}
    for b in p.complement:
        for e in p.complement:
            for k, c in n1.along(p.j({b: 1}), {e: 1}).items():
                _add(t, (b, e, k), c)
            for k, c in n2.along(p.j({b: 1}), {e: 1}).items():
                _add(t, (b, e, k), -c)
    return CECochain(0, {(): t})



def ce_chart(dim: int) -> Chart:
    return Chart.of(*[(f"xi{k + 1}", 1) for k in range(dim)])


def ce_homological_field(dim: int, brackets: Mapping[tuple[int, int], Mapping[int, object]]) -> VectorField:
    """Q = -1/2 sum c^k_ij xi^i xi^j d_k on g[1], without a Jacobi check so [Q, Q] exposes violations.

    Entries with i > j are used only when (j, i) is absent.
    """
    chart = ce_chart(dim)
    comps = [Poly.zero(chart) for _ in range(dim)]
    for (i, j), v in brackets.items():
        if i == j or (i > j and (j, i) in brackets):
            continue
        lo, hi = min(i, j), max(i, j)
        mono = tuple(1 if t in (lo, hi) else 0 for t in range(dim))
        sign = 1 if i < j else -1
        for k, c in v.items():
            comps[k] = comps[k] + Poly.monomial(chart, mono, -Fraction(c) * sign)
    return VectorField(chart, tuple(comps))
