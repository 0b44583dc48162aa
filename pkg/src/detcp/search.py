"""Deterministic sequential binary depth-first search.

Every node is identified by its path from the root (0 = left, 1 = right).
Paths are totally ordered in DFS preorder, which is the order in which the
sequential search visits nodes; the parallel engine uses this order to pick
the same solution the sequential search would return first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Callable, Optional, Protocol, Sequence, Union

from .model import Mode, Model, PathId, Sense, SolutionRecord, check_assignment
from .propagation import (
    CompiledModel,
    Decision,
    DomainStore,
    Polarity,
    pop_decision,
    probe_objective_cap,
    propagate,
    push_decision,
)

__all__ = [
    "CPProblem",
    "Decision",
    "DfsState",
    "Order",
    "SearchProblem",
    "SearchResult",
    "SearchStats",
    "as_problem",
    "branch_heuristic",
    "compare_paths",
    "effective_mode",
    "objective_cap",
    "record_path",
    "solve_seq",
]

LEFT_BRANCH, RIGHT_BRANCH = 0, 1


class Order(IntEnum):
    LEFT = -1
    EQUAL = 0
    RIGHT = 1


def compare_paths(a: Sequence[int], b: Sequence[int]) -> Order:
    """Order two paths in DFS preorder; a strict prefix comes first."""
    for x, y in zip(a, b):
        if x != y:
            return Order.LEFT if x < y else Order.RIGHT
    if len(a) == len(b):
        return Order.EQUAL
    return Order.LEFT if len(a) < len(b) else Order.RIGHT


class SearchProblem(Protocol):
    """What the search engines need from a problem.

    ``branch`` must depend on ``state`` alone so that replaying a path
    rebuilds the same node.  ``bound`` may only prune: the state left by
    ``apply`` must not depend on it.  ``apply`` opens an undo level even
    when it reports infeasibility; ``undo`` closes it.
    """

    sense: Sense

    def root(self) -> Optional[Any]: ...

    def branch(self, state) -> Optional[Decision]: ...

    def apply(self, state, decision: Decision, side: int, bound: Optional[int] = None) -> bool: ...

    def undo(self, state) -> None: ...

    def is_solution(self, state) -> bool: ...

    def objective(self, state) -> Optional[int]: ...

    def assignment(self, state) -> dict: ...


def branch_heuristic(store: DomainStore) -> Optional[Decision]:
    """Lowest-index unfixed variable, smallest value; None for a leaf."""
    for var, dom in enumerate(store.domains):
        if len(dom) > 1:
            return Decision(var, dom[0], Polarity.ASSIGN)
    return None


class CPProblem:
    """Adapts a :class:`Model` to :class:`SearchProblem` via a trailed DomainStore."""

    def __init__(self, model: Model):
        self.model = model
        self.compiled = CompiledModel(model)
        self.sense = model.objective.sense

    def root(self) -> Optional[DomainStore]:
        store = DomainStore(self.compiled)
        return store if propagate(store) else None

    def branch(self, store: DomainStore) -> Optional[Decision]:
        return branch_heuristic(store)

    def apply(self, store: DomainStore, decision: Decision, side: int, bound: Optional[int] = None) -> bool:
        d = decision if side == LEFT_BRANCH else decision.negated()
        if not push_decision(store, d):
            return False
        # the bound only prunes; letting it narrow the store would make the
        # next branching decision, and so the meaning of a path, depend on
        # when the node was reached
        return bound is None or bool(probe_objective_cap(store, bound))

    def undo(self, store: DomainStore) -> None:
        pop_decision(store)

    def is_solution(self, store: DomainStore) -> bool:
        # filters for != and all_different are incomplete; re-check the leaf
        return store.all_fixed() and check_assignment(self.model, store.assignment())

    def objective(self, store: DomainStore) -> Optional[int]:
        v = self.compiled.objective
        return store.value(v) if v is not None else None

    def assignment(self, store: DomainStore) -> dict:
        return store.assignment()


def as_problem(x: Union[Model, SearchProblem]) -> SearchProblem:
    return CPProblem(x) if isinstance(x, Model) else x


def effective_mode(mode: Union[Mode, str], sense: Sense) -> Mode:
    """Optimizing a satisfaction problem is the same as asking for the first solution."""
    mode = Mode(mode)
    if mode is Mode.OPTIMIZE and sense is Sense.SATISFY:
        return Mode.FIRST
    return mode


def objective_cap(sense: Sense, incumbent: Optional[tuple[int, PathId]], path: Sequence[int]) -> Optional[int]:
    """Worst objective value still worth finding below the node at ``path``.

    Left of (or above) the incumbent an equal value may still win the tie,
    to its right only a strictly better one can.
    """
    if incumbent is None or sense is Sense.SATISFY:
        return None
    value, inc_path = incumbent
    if compare_paths(path, inc_path) is Order.RIGHT:
        return value - 1 if sense is Sense.MINIMIZE else value + 1
    return value


class _Frame:
    __slots__ = ("decision", "right_pending")

    def __init__(self, decision: Optional[Decision], right_pending: bool = True):
        self.decision = decision
        self.right_pending = right_pending


class DfsState:
    """A worker's position in its subtree: problem state, path and open branch points.

    ``frames[i]`` belongs to the node at depth ``len(base) + i``; its right
    child is pending while ``right_pending`` is set.
    """

    def __init__(self, problem: SearchProblem, state: Any, base: Sequence[int] = ()):
        self.problem = problem
        self.state = state
        self.base = tuple(base)
        self.path: list[int] = list(base)
        self.frames: list[_Frame] = []

    @classmethod
    def at(cls, path: Sequence[int], pending_depths: Sequence[int] = (), base: Sequence[int] = ()) -> "DfsState":
        """Bookkeeping-only state at ``path`` (no problem), for tests and tooling.

        ``pending_depths`` lists the depths whose right child is still open;
        a depth ``d`` refers to the right sibling of ``path[:d]``.
        """
        dfs = cls(None, None, base)
        dfs.path = list(path)
        for depth in range(len(base) + 1, len(path) + 1):
            pending = depth in pending_depths
            if pending and path[depth - 1] != LEFT_BRANCH:
                raise ValueError(f"depth {depth} is a right branch, nothing pending there")
            dfs.frames.append(_Frame(None, pending))
        return dfs

    @property
    def depth(self) -> int:
        return len(self.path)

    def record_path(self) -> PathId:
        return tuple(self.path)

    def pending_depths(self) -> list[int]:
        offset = len(self.base) + 1
        return [offset + i for i, f in enumerate(self.frames) if f.right_pending]

    def detach_right(self, depth: int) -> PathId:
        """Mark the pending right child at ``depth`` as taken elsewhere; return its path."""
        frame = self.frames[depth - len(self.base) - 1]
        if not frame.right_pending:
            raise ValueError(f"no pending right branch at depth {depth}")
        frame.right_pending = False
        return tuple(self.path[:depth - 1]) + (RIGHT_BRANCH,)

    def open(self, decision: Decision) -> None:
        self.frames.append(_Frame(decision))

    def descend_left(self, bound_for: Callable[[Sequence[int]], Optional[int]]) -> bool:
        self.path.append(LEFT_BRANCH)
        return self.problem.apply(self.state, self.frames[-1].decision, LEFT_BRANCH, bound_for(self.path))

    def next_sibling(self, bound_for: Callable[[Sequence[int]], Optional[int]]) -> Optional[bool]:
        """Backtrack to the deepest pending right branch and enter it.

        Returns the feasibility of the entered node, or None once the whole
        subtree below ``base`` is exhausted.
        """
        frames, path, problem, state = self.frames, self.path, self.problem, self.state
        while frames:
            problem.undo(state)
            top = frames[-1]
            if top.right_pending:
                top.right_pending = False
                path[-1] = RIGHT_BRANCH
                return problem.apply(state, top.decision, RIGHT_BRANCH, bound_for(path))
            frames.pop()
            path.pop()
        return None


def record_path(dfs: DfsState) -> PathId:
    return dfs.record_path()


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    failures: int = 0
    solutions_found: int = 0
    max_depth: int = 0


@dataclass
class SearchResult:
    solutions: list[SolutionRecord] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def solution(self) -> Optional[SolutionRecord]:
        return self.solutions[0] if self.solutions else None


def _no_bound(path) -> None:
    return None


def solve_seq(problem: Union[Model, SearchProblem], mode: Union[Mode, str] = Mode.FIRST) -> SearchResult:
    """Left-first binary DFS; the reference result every parallel run must reproduce.

    ``first`` stops at the first solution leaf, ``all`` collects every
    solution in path order, ``opt`` is depth-first branch-and-bound keeping
    the first optimal solution met.
    """
    problem = as_problem(problem)
    sense = problem.sense
    mode = effective_mode(mode, sense)
    result = SearchResult()
    stats = result.stats
    state = problem.root()
    stats.nodes_expanded = 1
    if state is None:
        stats.failures = 1
        return result
    dfs = DfsState(problem, state)
    incumbent: Optional[SolutionRecord] = None

    if mode is Mode.OPTIMIZE:
        def bound_for(path):
            if incumbent is None:
                return None
            return objective_cap(sense, (incumbent.objective, incumbent.path), path)
    else:
        bound_for = _no_bound

    ok = True
    while True:
        if ok:
            decision = problem.branch(state)
            if decision is not None:
                dfs.open(decision)
                ok = dfs.descend_left(bound_for)
                stats.nodes_expanded += 1
                stats.failures += not ok
                if dfs.depth > stats.max_depth:
                    stats.max_depth = dfs.depth
                continue
            if problem.is_solution(state):
                stats.solutions_found += 1
                rec = SolutionRecord(problem.assignment(state), problem.objective(state), dfs.record_path())
                if mode is Mode.FIRST:
                    result.solutions.append(rec)
                    return result
                if mode is Mode.ALL:
                    result.solutions.append(rec)
                elif incumbent is None or _strictly_better(sense, rec.objective, incumbent.objective):
                    incumbent = rec
            else:
                stats.failures += 1
        ok = dfs.next_sibling(bound_for)
        if ok is None:
            break
        stats.nodes_expanded += 1
        stats.failures += not ok
    if incumbent is not None:
        result.solutions.append(incumbent)
    return result


def _strictly_better(sense: Sense, value: int, other: int) -> bool:
    return value < other if sense is Sense.MINIMIZE else value > other
