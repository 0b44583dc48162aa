import pytest

from detcp.model import (
    Constraint,
    Mode,
    Model,
    ModelError,
    Objective,
    SolutionRecord,
    VariableDecl,
    brute_force_solve,
    check_assignment,
    validate_model,
)


def _xy(*constraints, objective=Objective()):
    decls = (VariableDecl.interval("x", 0, 3), VariableDecl.interval("y", 0, 3))
    return Model(decls, tuple(constraints), objective)


def test_well_formed_model_has_no_diagnostics(sum3):
    assert validate_model(sum3) == []


def test_unknown_variable():
    m = _xy(Constraint.lin_eq([1, 1], ["x", "z"], 3))
    [d] = validate_model(m)
    assert str(d) == "unknown variable z"
    assert d.constraint == 0


def test_arity_mismatch():
    decls = tuple(VariableDecl.interval(v, 0, 3) for v in "xyz")
    m = Model(decls, (Constraint("int_lin_eq", ("x", "y", "z"), (1, 1), 3),))
    [d] = validate_model(m)
    assert str(d).startswith("arity mismatch")


def test_duplicate_and_empty_domain():
    m = Model((VariableDecl.interval("x", 0, 1), VariableDecl("x", ())))
    msgs = [str(d) for d in validate_model(m)]
    assert "duplicate variable x" in msgs
    assert "empty domain for variable x" in msgs


def test_unknown_objective_variable():
    m = _xy(objective=Objective.minimize("w"))
    assert [str(d) for d in validate_model(m)] == ["unknown variable w"]


@pytest.mark.parametrize(
    "constraint, assignment, expected",
    [
        (Constraint.lin_eq([1, 1], ["x", "y"], 3), {"x": 1, "y": 2}, True),
        (Constraint.all_different(["x", "y"]), {"x": 2, "y": 2}, False),
        (Constraint.lin_le([2, -1], ["x", "y"], 0), {"x": 1, "y": 1}, False),
        (Constraint.lin_ne([1, -1], ["x", "y"], 1), {"x": 2, "y": 1}, False),
        (Constraint.lin_ne([1, -1], ["x", "y"], 1), {"x": 2, "y": 2}, True),
    ],
)
def test_check_assignment(constraint, assignment, expected):
    assert check_assignment(_xy(constraint), assignment) is expected


def test_check_assignment_needs_every_variable(sum3):
    with pytest.raises(ModelError):
        check_assignment(sum3, {"x": 1})


def test_brute_force_queens4(queens4):
    [first] = brute_force_solve(queens4, Mode.FIRST)
    assert first.values(queens4.names) == [1, 3, 0, 2]
    assert len(brute_force_solve(queens4, Mode.ALL)) == 2


def test_brute_force_minimize(min_model):
    [best] = brute_force_solve(min_model, Mode.OPTIMIZE)
    assert best.assignment == {"x": 0, "y": 3}
    assert best.objective == 0


def test_brute_force_optimize_keeps_lexicographically_first_tie():
    m = _xy(Constraint.lin_eq([1, 1], ["x", "y"], 3), objective=Objective.maximize("y"))
    [best] = brute_force_solve(_xy(objective=Objective.minimize("y")), Mode.OPTIMIZE)
    assert best.assignment == {"x": 0, "y": 0}
    assert brute_force_solve(m, Mode.OPTIMIZE)[0].assignment == {"x": 0, "y": 3}


def test_brute_force_refuses_large_spaces(queens4):
    with pytest.raises(ModelError, match="exceeds"):
        brute_force_solve(queens4, Mode.ALL, cap=100)


def test_brute_force_unsat():
    m = _xy(Constraint.lin_eq([1, 1], ["x", "y"], 9))
    assert brute_force_solve(m, Mode.FIRST) == []
    assert brute_force_solve(m, Mode.ALL) == []


def test_path_string():
    assert SolutionRecord({}, None, (0, 1, 1)).path_string() == "011"
    assert SolutionRecord({}, None, ()).path_string() == ""
