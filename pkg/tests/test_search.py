import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detcp.corpus import COP_BUILDERS, queens
from detcp.model import Mode, Sense, brute_force_solve
from detcp.propagation import Decision, DomainStore
from detcp.search import (
    CPProblem,
    DfsState,
    Order,
    branch_heuristic,
    compare_paths,
    effective_mode,
    objective_cap,
    record_path,
    solve_seq,
)
from detcp.synthetic import Shape, SyntheticSpec, gen_synthetic
from detcp.model import Model, VariableDecl

from .strategies import small_models


@pytest.mark.parametrize(
    "a, b, expected",
    [((0, 1), (1, 0), Order.LEFT), ((0, 1, 1), (0, 1, 1), Order.EQUAL), ((0,), (0, 1), Order.LEFT),
     ((1,), (0, 1, 1), Order.RIGHT), ((), (0,), Order.LEFT), ((), (), Order.EQUAL)],
)
def test_compare_paths(a, b, expected):
    assert compare_paths(a, b) is expected
    assert compare_paths(b, a) is Order(-expected)


def test_branch_heuristic():
    m = Model((VariableDecl.of("x0", [4]), VariableDecl.of("x1", [2, 5, 7])))
    assert branch_heuristic(DomainStore(m)) == Decision(1, 2)
    m = Model((VariableDecl.interval("x0", 0, 1), VariableDecl.of("x1", [2, 5, 7])))
    assert branch_heuristic(DomainStore(m)) == Decision(0, 0)
    m = Model((VariableDecl.of("x0", [3]),))
    assert branch_heuristic(DomainStore(m)) is None


def test_record_path_walk():
    problem = gen_synthetic(SyntheticSpec(3, Shape.WORST))
    dfs = DfsState(problem, problem.root())
    assert record_path(dfs) == ()

    def no_bound(path):
        return None

    dfs.open(problem.branch(dfs.state))
    dfs.descend_left(no_bound)
    dfs.open(problem.branch(dfs.state))
    dfs.descend_left(no_bound)
    dfs.next_sibling(no_bound)
    assert record_path(dfs) == (0, 1)
    dfs.next_sibling(no_bound)
    assert record_path(dfs) == (1,)
    assert dfs.next_sibling(no_bound) is None


def test_queens4_first(queens4):
    res = solve_seq(queens4, Mode.FIRST)
    assert res.solution.values(queens4.names) == [1, 3, 0, 2]
    assert res.stats.solutions_found == 1


def test_queens4_all_paths_increase(queens4):
    res = solve_seq(queens4, Mode.ALL)
    assert len(res.solutions) == 2
    paths = [s.path for s in res.solutions]
    assert compare_paths(paths[0], paths[1]) is Order.LEFT


def test_minimize(min_model):
    res = solve_seq(min_model, Mode.OPTIMIZE)
    assert res.solution.objective == 0
    assert res.solution.assignment == {"x": 0, "y": 3}


def test_unsat_root():
    res = solve_seq(queens(3), Mode.FIRST)
    assert res.solutions == []
    assert res.stats.nodes_expanded >= 1


def test_optimize_on_satisfy_model_is_first(queens4):
    assert effective_mode("opt", Sense.SATISFY) is Mode.FIRST
    assert solve_seq(queens4, "opt").solutions == solve_seq(queens4, "first").solutions


def test_objective_cap_is_strict_only_to_the_right():
    inc = (18, (0, 1, 1))
    assert objective_cap(Sense.MINIMIZE, inc, (0, 0)) == 18
    assert objective_cap(Sense.MINIMIZE, inc, (0,)) == 18
    assert objective_cap(Sense.MINIMIZE, inc, (1,)) == 17
    assert objective_cap(Sense.MAXIMIZE, inc, (1, 0)) == 19
    assert objective_cap(Sense.MINIMIZE, None, (1,)) is None


@pytest.mark.parametrize("name", sorted(COP_BUILDERS))
def test_cop_matches_oracle(name):
    m = COP_BUILDERS[name]()
    [best] = brute_force_solve(m, Mode.OPTIMIZE)
    got = solve_seq(m, Mode.OPTIMIZE).solution
    assert (got.objective, got.assignment) == (best.objective, best.assignment)


@settings(max_examples=150, deadline=None)
@given(small_models(max_vars=3))
def test_all_mode_matches_oracle_in_order(model):
    oracle = [s.assignment for s in brute_force_solve(model, Mode.ALL)]
    res = solve_seq(model, Mode.ALL)
    assert [s.assignment for s in res.solutions] == oracle
    paths = [s.path for s in res.solutions]
    assert all(compare_paths(a, b) is Order.LEFT for a, b in zip(paths, paths[1:]))


@settings(max_examples=150, deadline=None)
@given(small_models(max_vars=3, objective=True))
def test_optimize_matches_oracle(model):
    oracle = brute_force_solve(model, Mode.OPTIMIZE)
    got = solve_seq(model, Mode.OPTIMIZE).solutions
    assert [(s.objective, s.assignment) for s in got] == [(s.objective, s.assignment) for s in oracle]


@settings(max_examples=200, deadline=None)
@given(small_models(max_vars=4, objective=True), st.data())
def test_bound_prunes_but_never_reshapes_the_tree(model, data):
    problem = CPProblem(model)
    plain, bounded = problem.root(), problem.root()
    if plain is None:
        return
    lo, hi = min(map(min, plain.domains)), max(map(max, plain.domains))
    while (d := problem.branch(plain)) is not None:
        side = data.draw(st.integers(0, 1))
        bound = data.draw(st.integers(lo - 1, hi + 1))
        ok_plain = problem.apply(plain, d, side)
        ok_bounded = problem.apply(bounded, d, side, bound)
        assert plain.domains == bounded.domains
        assert ok_plain or not ok_bounded
        if not ok_plain:
            break
