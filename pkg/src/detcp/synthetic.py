"""Synthetic binary search trees with a chosen solution layout.

No propagation happens: every node is feasible and feasibility is only
decided at the leaves, so an engine has to walk the whole shape to prove
there is nothing further left.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .model import Sense
from .propagation import Decision

MAX_DEPTH = 30


class Shape(str, Enum):
    BEST = "best"          # unique solution at the rightmost leaf
    WORST = "worst"        # unique solution at the leftmost leaf
    BALANCED = "balanced"  # solutions spread evenly over the leaves


@dataclass(frozen=True)
class SyntheticSpec:
    depth: int
    shape: Shape = Shape.BALANCED
    solution_count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in 1..{MAX_DEPTH}, got {self.depth}")
        if self.shape is Shape.BALANCED and not 1 <= self.solution_count <= 2 ** self.depth:
            raise ValueError(f"solution_count must be in 1..{2 ** self.depth}")

    @property
    def name(self) -> str:
        if self.shape is Shape.BALANCED:
            return f"synth-{self.shape.value}-d{self.depth}-k{self.solution_count}"
        return f"synth-{self.shape.value}-d{self.depth}"


def leaf_path(index: int, depth: int) -> tuple[int, ...]:
    return tuple((index >> (depth - 1 - i)) & 1 for i in range(depth))


class SyntheticProblem:
    """Complete binary tree of ``depth`` levels; state is the current path."""

    sense = Sense.SATISFY

    def __init__(self, depth: int, solutions):
        self.depth = depth
        self.solutions = frozenset(tuple(s) for s in solutions)

    def root(self) -> list[int]:
        return []

    def branch(self, state: list[int]) -> Optional[Decision]:
        if len(state) < self.depth:
            return Decision(len(state), 0)
        return None

    def apply(self, state: list[int], decision: Decision, side: int, bound=None) -> bool:
        state.append(side)
        return True

    def undo(self, state: list[int]) -> None:
        state.pop()

    def is_solution(self, state: list[int]) -> bool:
        return tuple(state) in self.solutions

    def objective(self, state) -> None:
        return None

    def assignment(self, state: list[int]) -> dict:
        return {f"b{i}": bit for i, bit in enumerate(state)}


def gen_synthetic(spec: SyntheticSpec) -> SyntheticProblem:
    d = spec.depth
    if spec.shape is Shape.BEST:
        sols = [(1,) * d]
    elif spec.shape is Shape.WORST:
        sols = [(0,) * d]
    else:
        step = 2 ** d // spec.solution_count
        sols = [leaf_path(i * step, d) for i in range(spec.solution_count)]
    return SyntheticProblem(d, sols)
