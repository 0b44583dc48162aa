import pytest

from detcp.model import Mode
from detcp.search import solve_seq
from detcp.synthetic import Shape, SyntheticSpec, gen_synthetic, leaf_path


def _solution_paths(spec):
    return [s.path for s in solve_seq(gen_synthetic(spec), Mode.ALL).solutions]


def test_best_case():
    assert _solution_paths(SyntheticSpec(3, Shape.BEST)) == [(1, 1, 1)]


def test_worst_case():
    assert _solution_paths(SyntheticSpec(3, Shape.WORST)) == [(0, 0, 0)]


def test_balanced_spacing():
    assert _solution_paths(SyntheticSpec(3, Shape.BALANCED, 2)) == [(0, 0, 0), (1, 0, 0)]
    assert _solution_paths(SyntheticSpec(4, Shape.BALANCED, 4)) == [leaf_path(i, 4) for i in (0, 4, 8, 12)]


def test_full_tree_is_searched():
    res = solve_seq(gen_synthetic(SyntheticSpec(5, Shape.BEST)), Mode.ALL)
    assert res.stats.nodes_expanded == 2 ** 6 - 1


@pytest.mark.parametrize("depth", [0, 31])
def test_depth_out_of_range(depth):
    with pytest.raises(ValueError):
        SyntheticSpec(depth, Shape.BEST)


def test_too_many_solutions():
    with pytest.raises(ValueError):
        SyntheticSpec(2, Shape.BALANCED, 5)


def test_assignment_mirrors_path():
    [s] = solve_seq(gen_synthetic(SyntheticSpec(3, Shape.BEST)), Mode.FIRST).solutions
    assert s.assignment == {"b0": 1, "b1": 1, "b2": 1}
