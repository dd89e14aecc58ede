"""Scene files: JSON validation against the shipped schema and construction of a check Context."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from typing import Any

import jsonschema

from . import atiyah as at
from . import lie_pair_point as lp
from .checks import Context
from .corpus import Bounds
from .derivations import PreconditionError, VectorField
from .graded_algebra import Chart, ParseError, Poly, parse_poly


class SceneError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


def load_schema(name: str) -> dict:
    return json.loads(resources.files("dgatlas").joinpath("schemas").joinpath(f"{name}.schema.json").read_text())


def _locate(raw: str, needle: str, offset: int = 0) -> tuple[int | None, int | None]:
    """Line and column (1-based) of ``needle`` within ``raw``, shifted by ``offset`` characters."""
    if raw is None:
        return None, None
    k = raw.find(needle)
    if k < 0:
        return None, None
    k += offset
    line = raw.count("\n", 0, k) + 1
    col = k - (raw.rfind("\n", 0, k) + 1) + 1
    return line, col


def parse_scene_text(raw: str) -> dict:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise SceneError(f"invalid JSON: {e.msg}", e.lineno, e.colno) from None
    validate_scene(data, raw)
    return data


def validate_scene(data: Any, raw: str | None = None) -> None:
    validator = jsonschema.Draft202012Validator(load_schema("scene"))
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        line = col = None
        if e.absolute_path:
            line, col = _locate(raw, json.dumps(e.absolute_path[-1]))
        raise SceneError(f"schema violation at {path}: {e.message}", line, col)


def _rat(v) -> Fraction:
    return Fraction(str(v)) if isinstance(v, str) else Fraction(v)


def _expr(src: str, chart: Chart, raw: str | None, where: str) -> Poly:
    try:
        return parse_poly(src, chart)
    except ParseError as e:
        line, col = _locate(raw, json.dumps(src), 1 + (e.position or 0))
        raise SceneError(f"{where}: {e}", line, col) from None


def _lie_pair_parts(block: dict):
    c = block["structure_constants"]
    dim = len(c)
    brackets: dict = {}
    for i in range(dim):
        if len(c[i]) != dim or any(len(row) != dim for row in c[i]):
            raise SceneError("structure_constants must be a dim x dim x dim tensor")
        for j in range(dim):
            vec = {k: _rat(x) for k, x in enumerate(c[i][j]) if _rat(x)}
            other = {k: -_rat(x) for k, x in enumerate(c[j][i]) if _rat(x)}
            if vec != other:
                raise SceneError(f"structure constants are not antisymmetric at ({i}, {j})")
            if i < j and vec:
                brackets[(i, j)] = vec
    h = list(block["h"])
    if any(x >= dim for x in h):
        raise SceneError("h index out of range")
    comp = block.get("complement")
    if comp is not None and sorted(comp) != [x for x in range(dim) if x not in h]:
        raise SceneError("complement must list exactly the indices not in h")
    return dim, brackets, h


def build_context(scene: dict, raw: str | None = None) -> Context:
    b = scene.get("bounds", {})
    bounds = Bounds(b.get("max_arity", 3), b.get("max_order", 2), b.get("max_poly_degree", 4), b.get("samples", 200))
    pair = None
    pair_error = None
    lie_connections: dict = {}
    block = scene.get("lie_pair")
    if block is not None:
        dim, brackets, h = _lie_pair_parts(block)
        split = {int(k): {int(i): _rat(v) for i, v in vec.items()} for k, vec in block.get("splitting", {}).items()}
        try:
            pair = lp.LiePairPoint(dim, brackets, h, split or None)
        except PreconditionError as e:
            pair_error = str(e)
        if pair is not None:
            for name, entries in block.get("connections", {}).items():
                table = {(e["along"], e["section"]): {int(k): _rat(v) for k, v in e["value"].items()} for e in entries}
                try:
                    lie_connections[name] = lp.BottExtension(pair, table)
                except ValueError as e:
                    raise SceneError(f"lie_pair connection {name}: {e}") from None
    if "chart" in scene:
        names = [n for n, _ in scene["chart"]]
        if len(set(names)) != len(names):
            raise SceneError("duplicate coordinate names in chart")
        chart = Chart.of(*[(n, d) for n, d in scene["chart"]])
        comps = {}
        for name, src in scene.get("Q", {}).items():
            if name not in names:
                line, col = _locate(raw, json.dumps(name))
                raise SceneError(f"Q names unknown coordinate {name!r}", line, col)
            comps[name] = _expr(src, chart, raw, f"Q[{name}]")
        q = VectorField.from_dict(chart, comps)
    else:
        chart = lp.ce_chart(dim)
        q = lp.ce_homological_field(dim, brackets)
        if "Q" in scene:
            raise SceneError("Q requires an explicit chart")
    if not q.is_zero() and q.degrees() != {1}:
        raise SceneError(f"Q must have degree +1, found degrees {sorted(q.degrees())}")
    ctx = Context(chart, q, bounds, {}, pair, lie_connections, pair_error)
    for name, entries in scene.get("connections", {}).items():
        ctx.connections[name] = _connection(ctx, name, entries, raw)
    return ctx


def _connection(ctx: Context, name: str, entries: list, raw: str | None) -> at.Connection:
    t = ctx.tangent
    coords = {c.name: i for i, c in enumerate(ctx.chart.coordinates)}
    basis = {n: a for a, n in enumerate(t.basis_names)}
    chris = {}
    for e in entries:
        if e["coordinate"] not in coords:
            raise SceneError(f"connection {name}: unknown coordinate {e['coordinate']!r}", *_locate(raw, json.dumps(e["coordinate"])))
        for key in [e["basis"], *e["value"]]:
            if key not in basis:
                raise SceneError(f"connection {name}: unknown basis element {key!r} (expected one of {list(basis)})",
                                 *_locate(raw, json.dumps(key)))
        coeffs = [Poly.zero(ctx.chart)] * t.rank
        for k, src in e["value"].items():
            coeffs[basis[k]] = _expr(src, ctx.chart, raw, f"connection {name}")
        chris[(coords[e["coordinate"]], basis[e["basis"]])] = t.element(coeffs)
    try:
        return at.Connection(t, chris)
    except ValueError as e:
        raise SceneError(f"connection {name}: {e}") from None
