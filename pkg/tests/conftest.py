from __future__ import annotations

from pathlib import Path

import pytest

from detcp.corpus import min_xy, queens
from detcp.model import Constraint, Model, VariableDecl

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def queens4() -> Model:
    return queens(4)


@pytest.fixture
def min_model() -> Model:
    # minimize x s.t. x + y >= 3, x, y in 0..3
    return min_xy()


@pytest.fixture
def sum3() -> Model:
    return Model(
        (VariableDecl.interval("x", 0, 3), VariableDecl.interval("y", 0, 3)),
        (Constraint.lin_eq([1, 1], ["x", "y"], 3),),
    )
