"""Shared hypothesis strategies for small enumerable instances."""

from __future__ import annotations

from itertools import combinations

import hypothesis.strategies as st

from potts_gks import PottsModel, SpinFunction, make_family

_pos = st.floats(0.0, 2.5, allow_nan=False, allow_infinity=False)


@st.composite
def small_models(draw, max_n=4, max_q=4, with_fields=True):
    n = draw(st.integers(1, max_n))
    q = draw(st.integers(2, max_q))
    vertices = tuple(f"v{i}" for i in range(n))
    pairs = [
        (f"v{i}", f"v{j}")
        for i, j in combinations(range(n), 2)
        if draw(st.booleans())
    ]
    J = tuple(draw(_pos) for _ in pairs)
    if with_fields and draw(st.booleans()):
        h = tuple(draw(st.floats(0.0, 1.5, allow_nan=False)) for _ in range(n))
    else:
        h = (0.0,) * n
    return PottsModel(vertices, tuple(pairs), J, h, q)


@st.composite
def certified_functions(draw, q: int) -> SpinFunction:
    """Members of the peak-at-0 class: the three families (C with a
    random non-negative table whose peak sits at 0)."""
    kind = draw(st.sampled_from(["A", "B", "C"]))
    if kind in ("A", "B"):
        return make_family(kind, q)
    vals = [draw(st.floats(0.0, 1.0, allow_nan=False)) for _ in range(q)]
    vals[0] = max(vals)
    return make_family("C", q, vals)


@st.composite
def regions(draw, model: PottsModel):
    return tuple(v for v in model.vertices if draw(st.booleans()))


@st.composite
def model_function_region(draw, max_n=4, max_q=4, with_fields=True):
    model = draw(small_models(max_n=max_n, max_q=max_q, with_fields=with_fields))
    f = draw(certified_functions(model.q))
    R = draw(regions(model))
    return model, f, R
