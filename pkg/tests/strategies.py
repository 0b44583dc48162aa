"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

from hypothesis import strategies as st

from detcp.model import Constraint, Model, Objective, VariableDecl

paths = st.lists(st.integers(0, 1), max_size=12).map(tuple)


@st.composite
def small_models(draw, max_vars: int = 4, objective: bool = False) -> Model:
    n = draw(st.integers(2, max_vars))
    names = [f"v{i}" for i in range(n)]
    decls = tuple(
        VariableDecl(name, tuple(sorted(draw(st.sets(st.integers(-2, 4), min_size=1, max_size=4)))))
        for name in names
    )
    cons = []
    for _ in range(draw(st.integers(0, 3))):
        kind = draw(st.sampled_from(["eq", "le", "ne", "alldiff"]))
        scope = draw(st.lists(st.sampled_from(names), min_size=1, max_size=3, unique=True))
        if kind == "alldiff":
            cons.append(Constraint.all_different(scope))
            continue
        coeffs = draw(st.lists(st.integers(-3, 3).filter(bool), min_size=len(scope), max_size=len(scope)))
        rhs = draw(st.integers(-6, 6))
        cons.append(getattr(Constraint, f"lin_{kind}")(coeffs, scope, rhs))
    obj = Objective()
    if objective:
        obj = draw(st.sampled_from([Objective.minimize, Objective.maximize]))(draw(st.sampled_from(names)))
    return Model(decls, tuple(cons), obj)
