"""Shared charts and helpers for the test modules."""

from __future__ import annotations

from hypothesis import strategies as st

from dgatlas.derivations import VectorField
from dgatlas.graded_algebra import Chart, parse_poly
from dgatlas.lcg import LCG

MIXED = Chart.of(("x", 0), ("xi", 1), ("eta", -1))
G1 = Chart.of(("xi1", 1), ("xi2", 1))
EVEN2 = Chart.of(("x", 0), ("y", 0))

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rng_from(seed: int) -> LCG:
    return LCG(seed)


def P(src: str, chart: Chart = MIXED):
    return parse_poly(src, chart)


def vf(chart: Chart, **comps: str) -> VectorField:
    return VectorField.from_dict(chart, {k: parse_poly(v, chart) for k, v in comps.items()})


def mixed_q() -> VectorField:
    """Homological field xi d_x + xi*eta d_eta on the mixed chart."""
    return vf(MIXED, x="xi", eta="xi*eta")


def g1_q() -> VectorField:
    """CE field of [e1, e2] = e2 on g[1]."""
    return vf(G1, xi2="-xi1*xi2")
