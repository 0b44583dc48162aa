"""Builders for the bundled benchmark instances and access to their files."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .fzn import parse_file, serialize
from .model import Constraint, Model, Objective, VariableDecl

INSTANCE_DIR = Path(str(resources.files("detcp") / "instances"))


def queens(n: int) -> Model:
    """One column variable per row; columns all different, diagonals via pairwise !=."""
    qs = [f"q{i}" for i in range(n)]
    cons = [Constraint.all_different(qs)]
    for i in range(n):
        for j in range(i + 1, n):
            cons.append(Constraint.lin_ne([1, -1], [qs[i], qs[j]], j - i))
            cons.append(Constraint.lin_ne([1, -1], [qs[i], qs[j]], i - j))
    return Model(tuple(VariableDecl.interval(q, 0, n - 1) for q in qs), tuple(cons))


def magic_series(n: int) -> Model:
    """s[i] counts the occurrences of i in s, channelled through 0/1 indicators."""
    s = [f"s{i}" for i in range(n)]
    b = [[f"b{i}_{j}" for j in range(n)] for i in range(n)]  # b[i][j] == 1 iff s[j] == i
    decls = [VariableDecl.interval(v, 0, n - 1) for v in s]
    decls += [VariableDecl.interval(b[i][j], 0, 1) for i in range(n) for j in range(n)]
    cons = []
    for j in range(n):
        cons.append(Constraint.lin_eq([1] * n, [b[i][j] for i in range(n)], 1))
        cons.append(Constraint.lin_eq([1] + [-i for i in range(n)], [s[j]] + [b[i][j] for i in range(n)], 0))
    for i in range(n):
        cons.append(Constraint.lin_eq([1] + [-1] * n, [s[i]] + b[i], 0))
    cons.append(Constraint.lin_eq([1] * n, s, n))
    cons.append(Constraint.lin_eq(list(range(n)), s, n))
    return Model(tuple(decls), tuple(cons))


def schedule3() -> Model:
    """Three unit-slot tasks on one machine, task a at least two slots before b."""
    decls = tuple(VariableDecl.interval(t, 0, 4) for t in ("a", "b", "c"))
    cons = (
        Constraint.lin_le([1, -1], ["a", "b"], -2),
        Constraint.all_different(["a", "b", "c"]),
    )
    return Model(decls, cons)


def min_xy() -> Model:
    decls = (VariableDecl.interval("x", 0, 3), VariableDecl.interval("y", 0, 3))
    return Model(decls, (Constraint.lin_le([-1, -1], ["x", "y"], -3),), Objective.minimize("x"))


def knapsack(weights, values, capacity) -> Model:
    take = [f"t{i}" for i in range(len(weights))]
    decls = [VariableDecl.interval(t, 0, 1) for t in take]
    decls.append(VariableDecl.interval("value", 0, sum(values)))
    cons = (
        Constraint.lin_le(weights, take, capacity),
        Constraint.lin_eq([1] + [-v for v in values], ["value"] + take, 0),
    )
    return Model(tuple(decls), cons, Objective.maximize("value"))


def assignment(costs) -> Model:
    """Assign workers to jobs one-to-one at minimum total cost."""
    n = len(costs)
    x = [[f"x{i}_{j}" for j in range(n)] for i in range(n)]
    decls = [VariableDecl.interval(x[i][j], 0, 1) for i in range(n) for j in range(n)]
    decls.append(VariableDecl.interval("cost", 0, sum(map(sum, costs))))
    cons = [Constraint.lin_eq([1] * n, x[i], 1) for i in range(n)]
    cons += [Constraint.lin_eq([1] * n, [x[i][j] for i in range(n)], 1) for j in range(n)]
    flat = [x[i][j] for i in range(n) for j in range(n)]
    cons.append(Constraint.lin_eq([1] + [-costs[i][j] for i in range(n) for j in range(n)], ["cost"] + flat, 0))
    return Model(tuple(decls), tuple(cons), Objective.minimize("cost"))


def balance3() -> Model:
    """Split 9 into three parts keeping the first two as close as possible (many ties)."""
    decls = tuple(VariableDecl.interval(v, 0, 5) for v in ("a", "b", "c", "gap"))
    cons = (
        Constraint.lin_eq([1, 1, 1], ["a", "b", "c"], 9),
        Constraint.lin_le([1, -1, -1], ["a", "b", "gap"], 0),
        Constraint.lin_le([-1, 1, -1], ["a", "b", "gap"], 0),
        Constraint.lin_ne([1, -1], ["a", "c"], 0),
    )
    return Model(decls, cons, Objective.minimize("gap"))


CSP_BUILDERS = {
    "queens3_unsat": lambda: queens(3),
    "queens4": lambda: queens(4),
    "queens6": lambda: queens(6),
    "queens8": lambda: queens(8),
    "queens10": lambda: queens(10),
    "magic5": lambda: magic_series(5),
    "magic7": lambda: magic_series(7),
    "schedule3": schedule3,
}

COP_BUILDERS = {
    "min_xy": min_xy,
    "knapsack5": lambda: knapsack([2, 3, 4, 5, 3], [3, 4, 5, 6, 4], 8),
    "assign3": lambda: assignment([[4, 2, 5], [3, 6, 2], [2, 4, 3]]),
    "balance3": balance3,
    "knapsack12": lambda: knapsack([3, 4, 5, 2, 6, 3, 4, 5, 2, 6, 3, 4],
                                   [4, 5, 6, 3, 7, 4, 5, 6, 3, 7, 4, 5], 20),
    "assign4_ties": lambda: assignment([[1, 1, 2, 2], [1, 1, 2, 2], [2, 2, 1, 1], [2, 2, 1, 1]]),
}

BUILDERS = {**CSP_BUILDERS, **COP_BUILDERS}


def instance_path(name: str) -> Path:
    return INSTANCE_DIR / f"{name}.dfzn"


def load_instance(name: str) -> Model:
    return parse_file(instance_path(name))


def instance_names() -> list[str]:
    return sorted(p.stem for p in INSTANCE_DIR.glob("*.dfzn"))


def write_instances(directory: Path = INSTANCE_DIR) -> list[Path]:
    """Regenerate the bundled ``.dfzn`` files from the builders."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in BUILDERS.items():
        path = directory / f"{name}.dfzn"
        path.write_text(serialize(build()), encoding="utf-8")
        written.append(path)
    return written
