"""Free dg modules, smooth connections, the jet sequence and Atiyah cocycles.

A free module has a finite homogeneous basis e_a and its elements are written
sum_a f_a e_a with coefficients on the left.  The differential is determined
by L_Q(e_a) and the Leibniz rule L_Q(f xi) = Q(f) xi + (-1)^{|f|} f L_Q(xi).

Shifted vector fields X_bar in X(M)[-1] are stored as ordinary VectorFields;
their degree is |X| + 1.  The Atiyah cocycle on the polydifferential side is
computed directly on PolyDiffOp values since tot D_poly has infinite rank.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .derivations import PreconditionError, VectorField, apply_der, compose, lie_bracket, vf_homogeneous_parts
from .graded_algebra import Chart, ChartMismatch, Poly
from .poly_complex import (
    PolyDiffOp,
    cup,
    free_bracket,
    gerstenhaber_bracket,
    hochschild_d,
)


def _sgn(parity: int) -> int:
    return -1 if parity % 2 else 1


def _parts(f: Poly) -> dict[int, Poly]:
    return f.homogeneous_parts()


# ---------------------------------------------------------------------------
# modules


@dataclass(frozen=True)
class ModuleElt:
    module: "FreeDgModule"
    coeffs: tuple[Poly, ...]

    def __add__(self, other: "ModuleElt") -> "ModuleElt":
        return ModuleElt(self.module, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "ModuleElt":
        return ModuleElt(self.module, tuple(-a for a in self.coeffs))

    def __sub__(self, other: "ModuleElt") -> "ModuleElt":
        return self + (-other)

    def scale(self, c) -> "ModuleElt":
        return ModuleElt(self.module, tuple(a.scale(c) for a in self.coeffs))

    def __rmul__(self, f):
        if isinstance(f, Poly):
            return ModuleElt(self.module, tuple(f * a for a in self.coeffs))
        return self.scale(f)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def degrees(self) -> set[int]:
        out = set()
        for c, d in zip(self.coeffs, self.module.basis_degrees):
            out |= {p + d for p in c.degrees()}
        return out

    @property
    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError("inhomogeneous module element")
        return ds.pop() if ds else 0

    def homogeneous_parts(self) -> dict[int, "ModuleElt"]:
        out: dict[int, list] = {}
        n = len(self.coeffs)
        for a, (c, d) in enumerate(zip(self.coeffs, self.module.basis_degrees)):
            for p, cp in _parts(c).items():
                slot = out.setdefault(p + d, [Poly.zero(self.module.chart)] * n)
                slot[a] = slot[a] + cp
        return {k: ModuleElt(self.module, tuple(v)) for k, v in out.items()}

    def __eq__(self, other):
        return isinstance(other, ModuleElt) and self.module == other.module and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __str__(self):
        pieces = [f"({c})*{name}" for c, name in zip(self.coeffs, self.module.basis_names) if not c.is_zero()]
        return " + ".join(pieces) or "0"

    __repr__ = __str__


class FreeDgModule:
    """Finite free module over the chart's polynomial ring with L_Q fixed on the basis."""

    def __init__(self, chart: Chart, basis: Sequence[tuple[str, int]], q: VectorField | None = None,
                 differential: Mapping[int, Sequence[Poly]] | None = None):
        self.chart = chart
        self.basis_names = tuple(n for n, _ in basis)
        self.basis_degrees = tuple(d for _, d in basis)
        if len(set(self.basis_names)) != len(self.basis_names):
            raise ValueError("duplicate basis names")
        self.q = q if q is not None else VectorField.zero(chart)
        if self.q.chart != chart:
            raise ChartMismatch("Q lives on a different chart")
        n = len(basis)
        z = Poly.zero(chart)
        diff = differential or {}
        self._diff = tuple(tuple(diff.get(a, [z] * n)) for a in range(n))

    @property
    def rank(self) -> int:
        return len(self.basis_names)

    def __eq__(self, other):
        return (isinstance(other, FreeDgModule) and self.chart == other.chart
                and self.basis_names == other.basis_names and self.basis_degrees == other.basis_degrees
                and self._diff == other._diff and self.q == other.q)

    def __hash__(self):
        return hash((self.chart, self.basis_names, self.basis_degrees))

    def zero(self) -> ModuleElt:
        return ModuleElt(self, tuple(Poly.zero(self.chart) for _ in self.basis_names))

    def basis(self, a: int) -> ModuleElt:
        z = Poly.zero(self.chart)
        return ModuleElt(self, tuple(Poly.const(self.chart, 1) if b == a else z for b in range(self.rank)))

    def element(self, coeffs: Sequence[Poly]) -> ModuleElt:
        if len(coeffs) != self.rank:
            raise ValueError("one coefficient per basis element required")
        return ModuleElt(self, tuple(coeffs))

    def d_basis(self, a: int) -> ModuleElt:
        return ModuleElt(self, self._diff[a])

    def L_Q(self, xi: ModuleElt) -> ModuleElt:
        out = self.zero()
        for a, c in enumerate(xi.coeffs):
            for p, cp in _parts(c).items():
                qc = self.q(cp)
                out = out + qc * self.basis(a) + (cp * self.d_basis(a)).scale(_sgn(p))
        return out

    def is_dg(self) -> bool:
        """L_Q has degree +1 on the basis and squares to zero on it."""
        for a in range(self.rank):
            da = self.d_basis(a)
            if not da.is_zero() and da.degrees() != {self.basis_degrees[a] + 1}:
                return False
            if not self.L_Q(da).is_zero():
                return False
        return True


def tangent_shifted(chart: Chart, q: VectorField | None = None) -> FreeDgModule:
    """X(M)[-1] with basis d_bar_i of degree 1 - |x_i| and L_Q(X_bar) = bar [Q, X]."""
    q = q if q is not None else VectorField.zero(chart)
    basis = [(f"dbar_{c.name}", 1 - c.degree) for c in chart.coordinates]
    diff = {i: lie_bracket(q, VectorField.coordinate(chart, i)).components for i in range(len(chart))}
    return FreeDgModule(chart, basis, q, diff)


def shift_field(module: FreeDgModule, x: VectorField) -> ModuleElt:
    return module.element(x.components)


def unshift(xi: ModuleElt) -> VectorField:
    return VectorField(xi.module.chart, xi.coeffs)


def tensor_module(n1: FreeDgModule, n2: FreeDgModule) -> FreeDgModule:
    if n1.chart != n2.chart or n1.q != n2.q:
        raise ChartMismatch("tensor factors must share chart and Q")
    pairs = list(itertools.product(range(n1.rank), range(n2.rank)))
    basis = [(f"{n1.basis_names[a]}*{n2.basis_names[b]}", n1.basis_degrees[a] + n2.basis_degrees[b]) for a, b in pairs]
    mod = FreeDgModule(n1.chart, basis, n1.q)
    diff = {}
    for k, (a, b) in enumerate(pairs):
        val = tensor_elt(mod, n1, n2, n1.d_basis(a), n2.basis(b)) + \
            tensor_elt(mod, n1, n2, n1.basis(a), n2.d_basis(b)).scale(_sgn(n1.basis_degrees[a]))
        diff[k] = val.coeffs
    return FreeDgModule(n1.chart, basis, n1.q, diff)


def tensor_elt(mod: FreeDgModule, n1: FreeDgModule, n2: FreeDgModule, xi1: ModuleElt, xi2: ModuleElt) -> ModuleElt:
    """(f e_a) (x) (g e_b) = (-1)^{|g||e_a|} f g e_a (x) e_b."""
    chart = n1.chart
    coeffs = [Poly.zero(chart)] * mod.rank
    for a, f in enumerate(xi1.coeffs):
        if f.is_zero():
            continue
        for b, g in enumerate(xi2.coeffs):
            for p, gp in _parts(g).items():
                k = a * n2.rank + b
                coeffs[k] = coeffs[k] + (f * gp).scale(_sgn(p * n1.basis_degrees[a]))
    return ModuleElt(mod, tuple(coeffs))


# ---------------------------------------------------------------------------
# connections


@dataclass(frozen=True)
class Connection:
    """nabla_{d_i} e_a = christoffel[(i, a)]; missing entries are zero."""

    module: FreeDgModule
    christoffel: Mapping[tuple[int, int], ModuleElt] = field(default_factory=dict)

    def __post_init__(self):
        degs = self.module.chart.degrees
        for (i, a), v in self.christoffel.items():
            if v.module != self.module:
                raise ChartMismatch("Christoffel symbol lives in another module")
            want = self.module.basis_degrees[a] - degs[i]
            if not v.is_zero() and v.degrees() != {want}:
                raise ValueError(f"Christoffel symbol ({i}, {a}) must have degree {want}")

    def gamma(self, i: int, a: int) -> ModuleElt:
        return self.christoffel.get((i, a), self.module.zero())

    def along_partial(self, i: int, xi: ModuleElt) -> ModuleElt:
        degs = self.module.chart.degrees
        chart = self.module.chart
        out = self.module.zero()
        for a, f in enumerate(xi.coeffs):
            b = tuple(1 if k == i else 0 for k in range(len(chart)))
            out = out + apply_der(chart, b, f) * self.module.basis(a)
            for p, fp in _parts(f).items():
                out = out + (fp * self.gamma(i, a)).scale(_sgn(p * degs[i]))
        return out

    def __call__(self, x: VectorField, xi: ModuleElt) -> ModuleElt:
        out = self.module.zero()
        for i, c in enumerate(x.components):
            if not c.is_zero():
                out = out + c * self.along_partial(i, xi)
        return out

    def __sub__(self, other: "Connection") -> Callable[[VectorField, ModuleElt], ModuleElt]:
        return lambda x, xi: self(x, xi) - other(x, xi)


def flat_connection(module: FreeDgModule) -> Connection:
    return Connection(module, {})


def tensor_connection(c1: Connection, c2: Connection) -> tuple[FreeDgModule, Connection]:
    n1, n2 = c1.module, c2.module
    mod = tensor_module(n1, n2)
    degs = n1.chart.degrees
    chris = {}
    for i in range(len(n1.chart)):
        for a in range(n1.rank):
            for b in range(n2.rank):
                v = tensor_elt(mod, n1, n2, c1.gamma(i, a), n2.basis(b)) + \
                    tensor_elt(mod, n1, n2, n1.basis(a), c2.gamma(i, b)).scale(_sgn(-degs[i] * n1.basis_degrees[a]))
                if not v.is_zero():
                    chris[(i, a * n2.rank + b)] = v
    return mod, Connection(mod, chris)


# ---------------------------------------------------------------------------
# Hom cochains


class HomCochain:
    """A C-multilinear map of fixed degree given by its values on basis tuples."""

    def __init__(self, inputs: Sequence[FreeDgModule], output: FreeDgModule, degree: int,
                 table: Mapping[tuple[int, ...], ModuleElt]):
        self.inputs = tuple(inputs)
        self.output = output
        self.degree = degree
        self.table = {k: v for k, v in table.items() if not v.is_zero()}

    @classmethod
    def from_function(cls, inputs: Sequence[FreeDgModule], output: FreeDgModule, degree: int,
                      fn: Callable[..., ModuleElt]) -> "HomCochain":
        table = {}
        for idx in itertools.product(*[range(m.rank) for m in inputs]):
            table[idx] = fn(*[m.basis(a) for m, a in zip(inputs, idx)])
        return cls(inputs, output, degree, table)

    def __call__(self, *args: ModuleElt) -> ModuleElt:
        if len(args) != len(self.inputs):
            raise ValueError("wrong number of arguments")
        out = self.output.zero()
        split = [[(a, p, cp) for a, c in enumerate(x.coeffs) for p, cp in _parts(c).items()] for x in args]
        for combo in itertools.product(*split):
            idx = tuple(a for a, _, _ in combo)
            val = self.table.get(idx)
            if val is None:
                continue
            par = 0
            passed = self.degree
            coeff = Poly.const(self.output.chart, 1)
            for (a, p, cp), m in zip(combo, self.inputs):
                par += p * passed
                passed += m.basis_degrees[a]
                coeff = coeff * cp
            out = out + (coeff * val).scale(_sgn(par))
        return out

    def __sub__(self, other: "HomCochain") -> "HomCochain":
        keys = set(self.table) | set(other.table)
        z = self.output.zero()
        return HomCochain(self.inputs, self.output, self.degree,
                          {k: self.table.get(k, z) - other.table.get(k, z) for k in keys})

    def __eq__(self, other):
        if not isinstance(other, HomCochain):
            return NotImplemented
        return (self.inputs == other.inputs and self.output == other.output
                and (self.degree == other.degree or not self.table) and self.table == other.table)

    def is_zero(self) -> bool:
        return not self.table


def hom_differential(phi: HomCochain) -> HomCochain:
    """L_Q phi = L_Q o phi - (-1)^{deg phi} phi o L_Q (the latter a graded derivation over inputs)."""

    def fn(*args):
        out = phi.output.L_Q(phi(*args))
        acc = 0
        for i, (x, m) in enumerate(zip(args, phi.inputs)):
            moved = list(args)
            moved[i] = m.L_Q(x)
            out = out - phi(*moved).scale(_sgn(phi.degree + acc))
            acc += x.degree
        return out

    return HomCochain.from_function(phi.inputs, phi.output, phi.degree + 1, fn)


# ---------------------------------------------------------------------------
# Atiyah cocycles


def atiyah_value(nabla: Connection, x: VectorField, xi: ModuleElt) -> ModuleElt:
    """(-1)^{|X|} (L_Q nabla_X xi - nabla_{[Q,X]} xi - (-1)^{|X|} nabla_X L_Q xi), linear in X."""
    n = nabla.module
    out = n.zero()
    for d, xd in vf_homogeneous_parts(x).items():
        qx = lie_bracket(n.q, xd)
        val = n.L_Q(nabla(xd, xi)) - nabla(qx, xi) - nabla(xd, n.L_Q(xi)).scale(_sgn(d))
        out = out + val.scale(_sgn(d))
    return out


def atiyah_cocycle(nabla: Connection, tangent: FreeDgModule | None = None) -> HomCochain:
    n = nabla.module
    t = tangent or tangent_shifted(n.chart, n.q)
    return HomCochain.from_function([t, n], n, 0, lambda xb, xi: atiyah_value(nabla, unshift(xb), xi))


def connection_cochain(fn: Callable[[VectorField, ModuleElt], ModuleElt], source: FreeDgModule,
                       target: FreeDgModule, tangent: FreeDgModule | None = None) -> HomCochain:
    """Degree -1 cochain (X_bar, xi) -> (-1)^{|X|} fn(X, xi) for a C-bilinear difference fn."""
    t = tangent or tangent_shifted(source.chart, source.q)

    def val(xb, xi):
        out = target.zero()
        for d, xd in vf_homogeneous_parts(unshift(xb)).items():
            out = out + fn(xd, xi).scale(_sgn(d))
        return out

    return HomCochain.from_function([t, source], target, -1, val)


def class_independence(nabla1: Connection, nabla2: Connection) -> tuple[HomCochain, HomCochain]:
    """(alpha^1 - alpha^2, L_Q(nabla1 - nabla2)); equal as cochains."""
    n = nabla1.module
    t = tangent_shifted(n.chart, n.q)
    lhs = atiyah_cocycle(nabla1, t) - atiyah_cocycle(nabla2, t)
    rhs = hom_differential(connection_cochain(nabla1 - nabla2, n, n, t))
    return lhs, rhs


def tensor_cocycle(nabla1: Connection, nabla2: Connection) -> tuple[HomCochain, HomCochain]:
    """alpha of the tensor connection and the displayed two-term formula, both as cochains."""
    n1, n2 = nabla1.module, nabla2.module
    mod, nabla = tensor_connection(nabla1, nabla2)
    t = tangent_shifted(n1.chart, n1.q)
    lhs = atiyah_cocycle(nabla, t)

    table = {}
    for i in range(t.rank):
        x = unshift(t.basis(i))
        for a in range(n1.rank):
            for b in range(n2.rank):
                xi1, xi2 = n1.basis(a), n2.basis(b)
                val = tensor_elt(mod, n1, n2, atiyah_value(nabla1, x, xi1), xi2)
                for d, xd in vf_homogeneous_parts(x).items():
                    val = val + tensor_elt(mod, n1, n2, xi1, atiyah_value(nabla2, xd, xi2)).scale(
                        _sgn((d + 1) * n1.basis_degrees[a]))
                table[(i, a * n2.rank + b)] = val
    return lhs, HomCochain([t, mod], mod, 0, table)


@dataclass(frozen=True)
class ModuleMorphism:
    """Degree 0 C-linear map given by images of basis elements."""

    source: FreeDgModule
    target: FreeDgModule
    images: tuple[ModuleElt, ...]

    def __call__(self, xi: ModuleElt) -> ModuleElt:
        out = self.target.zero()
        for c, img in zip(xi.coeffs, self.images):
            if not c.is_zero():
                out = out + c * img
        return out

    def is_chain_map(self) -> bool:
        return all(self(self.source.d_basis(a)) == self.target.L_Q(self.images[a])
                   for a in range(self.source.rank))


def functoriality_homotopy(phi: ModuleMorphism, nabla1: Connection, nabla2: Connection) -> tuple[HomCochain, HomCochain]:
    """phi o alpha_1 - alpha_2 o (id (x) phi) and L_Q(phi o nabla_1 - nabla_2 o (id (x) phi))."""
    if not phi.is_chain_map():
        raise PreconditionError("phi does not commute with the module differentials")
    n1, n2 = phi.source, phi.target
    t = tangent_shifted(n1.chart, n1.q)
    lhs = HomCochain.from_function(
        [t, n1], n2, 0,
        lambda xb, xi: phi(atiyah_value(nabla1, unshift(xb), xi)) - atiyah_value(nabla2, unshift(xb), phi(xi)))
    diff = connection_cochain(lambda x, xi: phi(nabla1(x, xi)) - nabla2(x, phi(xi)), n1, n2, t)
    return lhs, hom_differential(diff)


# ---------------------------------------------------------------------------
# jet sequence


@dataclass(frozen=True)
class JetExtension:
    """0 -> N -i-> D^{<=1} (x) N -j-> X (x) N -> 0 on free bases.

    The middle module has basis d_i (x) e_a followed by 1 (x) e_a; an element
    is a pair (vector table indexed by (i, a), scalar ModuleElt).
    """

    module: FreeDgModule

    @property
    def n_coords(self) -> int:
        return len(self.module.chart)

    def i(self, xi: ModuleElt) -> tuple[dict, ModuleElt]:
        return {}, xi

    def j(self, elt: tuple[dict, ModuleElt]) -> dict:
        return {k: v for k, v in elt[0].items() if not v.is_zero()}

    def jet_of(self, x: VectorField, xi: ModuleElt) -> tuple[dict, ModuleElt]:
        """X (x) xi in the jet module via (X . g) = (-1)^{|g||X|} g X + X(g)."""
        chart = self.module.chart
        degs = chart.degrees
        vec: dict = {}
        sca = self.module.zero()
        for i, xc in enumerate(x.components):
            if xc.is_zero():
                continue
            for a, g in enumerate(xi.coeffs):
                for p, gp in _parts(g).items():
                    k = (i, a)
                    vec[k] = vec.get(k, Poly.zero(chart)) + (xc * gp).scale(_sgn(-p * degs[i]))
                b = tuple(1 if k == i else 0 for k in range(len(chart)))
                sca = sca + (xc * apply_der(chart, b, g)) * self.module.basis(a)
        return {k: v for k, v in vec.items() if not v.is_zero()}, sca

    def tangent_tensor(self, x: VectorField, xi: ModuleElt) -> dict:
        """X (x)_C xi written on the basis d_i (x) e_a."""
        return self.jet_of(x, xi)[0]

    def matrices(self) -> tuple[list[list[int]], list[list[int]]]:
        n = self.module.rank
        m = self.n_coords * n
        mid = m + n
        imat = [[1 if r == m + c else 0 for c in range(n)] for r in range(mid)]
        jmat = [[1 if r == c and c < m else 0 for c in range(mid)] for r in range(m)]
        return imat, jmat

    def exactness(self) -> dict[str, bool]:
        imat, jmat = self.matrices()
        n = self.module.rank
        m = self.n_coords * n

        def rank(mat):
            rows, cols = len(mat), len(mat[0]) if mat else 0
            if not rows or not cols:
                return 0
            return DomainMatrix([[QQ(v) for v in row] for row in mat], (rows, cols), QQ).rank()

        ji = [[sum(jmat[r][k] * imat[k][c] for k in range(len(imat))) for c in range(n)] for r in range(m)]
        return {
            "i_injective": rank(imat) == n,
            "j_surjective": rank(jmat) == m,
            "j_after_i_zero": all(v == 0 for row in ji for v in row),
            "middle_exact": rank(imat) + rank(jmat) == m + n,
        }


def splitting_from_connection(nabla: Connection) -> Callable[[dict], tuple[dict, ModuleElt]]:
    """s(X (x) xi) = X (x) xi - nabla_X xi, extended C-linearly from the basis d_i (x) e_a."""
    mod = nabla.module

    def s(tab: dict):
        sca = mod.zero()
        for (i, a), c in tab.items():
            sca = sca - c * nabla.gamma(i, a)
        return dict(tab), sca

    return s


def split_direct(nabla: Connection, x: VectorField, xi: ModuleElt) -> tuple[dict, ModuleElt]:
    """The displayed formula X (x) xi - nabla_X xi evaluated in the jet module."""
    jet = JetExtension(nabla.module)
    vec, sca = jet.jet_of(x, xi)
    return vec, sca - nabla(x, xi)


def connection_from_splitting(module: FreeDgModule, s: Callable[[dict], tuple[dict, ModuleElt]]) -> Connection:
    chart = module.chart
    one = Poly.const(chart, 1)
    chris = {}
    for i in range(len(chart)):
        for a in range(module.rank):
            _, sca = s({(i, a): one})
            if not sca.is_zero():
                chris[(i, a)] = -sca
    return Connection(module, chris)


# ---------------------------------------------------------------------------
# the canonical connection on D_poly


def canonical_connection(x: VectorField, d: PolyDiffOp) -> PolyDiffOp:
    """nabla^can_X: X(f) on functions, X o D_i factorwise with sign (-1)^{|X| sum_{j<i} |D_j|}.

    |D_j| is the total degree in tot D_poly, so each letter counts 1 + its internal degree.
    """
    chart = d.chart
    out = PolyDiffOp.zero(chart)
    for xdeg, xd in vf_homogeneous_parts(x).items():
        xop = xd.as_diffop()
        for (a, bs), v in d.terms.items():
            f = Poly.monomial(chart, a, v)
            word = [PolyDiffOp(chart, {(chart.zero_monomial(), (b,)): 1}) for b in bs]
            out = out + cup(PolyDiffOp.from_function(xd(f)), cup_all(chart, word))
            s_f = _sgn(f.degree * xdeg)
            acc = 0
            for i in range(len(word)):
                moved = PolyDiffOp.from_diffop(compose(xop, word[i].as_diffop()))
                term = cup(PolyDiffOp.from_function(f), cup_all(chart, word[:i] + [moved] + word[i + 1:]))
                out = out + term.scale(s_f * _sgn(acc * xdeg))
                acc += word[i].degree
    return out


def cup_all(chart: Chart, factors: Sequence[PolyDiffOp]) -> PolyDiffOp:
    out = PolyDiffOp.from_function(Poly.const(chart, 1))
    for f in factors:
        out = cup(out, f)
    return out


def _total_L(q: VectorField, d: PolyDiffOp) -> PolyDiffOp:
    qp = PolyDiffOp.from_vector_field(q)
    return gerstenhaber_bracket(qp, d) + hochschild_d(d)


def atiyah_dpoly_parts(q: VectorField, x: VectorField, d: PolyDiffOp) -> tuple[PolyDiffOp, PolyDiffOp]:
    """Vertical (L_Q) and horizontal (d_H) parts of alpha^can(X_bar, D) on tot D_poly."""
    chart = d.chart
    qp = PolyDiffOp.from_vector_field(q)
    vert = PolyDiffOp.zero(chart)
    horiz = PolyDiffOp.zero(chart)
    for xdeg, xd in vf_homogeneous_parts(x).items():
        s = _sgn(xdeg)
        nd = canonical_connection(xd, d)
        qx = lie_bracket(q, xd)
        v = gerstenhaber_bracket(qp, nd) - canonical_connection(qx, d) \
            - canonical_connection(xd, gerstenhaber_bracket(qp, d)).scale(s)
        h = hochschild_d(nd) - canonical_connection(xd, hochschild_d(d)).scale(s)
        vert = vert + v.scale(s)
        horiz = horiz + h.scale(s)
    return vert, horiz


def atiyah_dpoly(q: VectorField, x: VectorField, d: PolyDiffOp) -> PolyDiffOp:
    v, h = atiyah_dpoly_parts(q, x, d)
    return v + h


def check_prop_bracket(x: VectorField, ds: Sequence, q: VectorField) -> bool:
    """alpha^can(X_bar, D_1 u ... u D_n) = [[X_bar, D_1 u ... u D_n]] plus the derivation rule."""
    chart = x.chart
    factors = [PolyDiffOp.from_diffop(d) if not isinstance(d, PolyDiffOp) else d for d in ds]
    p = cup_all(chart, factors)
    xp = PolyDiffOp.from_vector_field(x)
    if atiyah_dpoly(q, x, p) != free_bracket(xp, p):
        return False
    if len(factors) >= 2:
        p1, p2 = factors[0], cup_all(chart, factors[1:])
        for xdeg, xd in vf_homogeneous_parts(x).items():
            for k1, h1 in p1.homogeneous_parts().items():
                lhs = atiyah_dpoly(q, xd, cup(h1, p2))
                rhs = cup(atiyah_dpoly(q, xd, h1), p2) + cup(h1, atiyah_dpoly(q, xd, p2)).scale(_sgn((xdeg + 1) * k1))
                if lhs != rhs:
                    return False
    return True


def main_diagram_sides(q: VectorField, nabla: Connection, x: VectorField, y: VectorField) -> tuple[PolyDiffOp, PolyDiffOp]:
    """theta(alpha^nabla(X_bar, Y_bar)) - [[X, Y]] and the (L_Q + d_H) Hom-differential of
    eta(X_bar, Y_bar) = (-1)^{|X|} (theta(nabla_X Y) - X o Y), for homogeneous X, Y."""
    chart = x.chart
    t = nabla.module
    xd = x.degree

    def theta(vf: VectorField) -> PolyDiffOp:
        return PolyDiffOp.from_vector_field(vf)

    def eta(u: VectorField, v: VectorField) -> PolyDiffOp:
        out = PolyDiffOp.zero(chart)
        for ud, uh in vf_homogeneous_parts(u).items():
            nab = unshift(nabla(uh, shift_field(t, v)))
            out = out + (theta(nab) - PolyDiffOp.from_diffop(compose(uh.as_diffop(), v.as_diffop()))).scale(_sgn(ud))
        return out

    alpha = unshift(atiyah_value(nabla, x, shift_field(t, y)))
    lhs = theta(alpha) - free_bracket(theta(x), theta(y))
    qx, qy = lie_bracket(q, x), lie_bracket(q, y)
    rhs = _total_L(q, eta(x, y)) + eta(qx, y) + eta(x, qy).scale(_sgn(xd + 1))
    return lhs, rhs
