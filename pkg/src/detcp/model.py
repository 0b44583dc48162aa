"""Immutable constraint models, assignment checking and a brute-force oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

LIN_EQ = "int_lin_eq"
LIN_LE = "int_lin_le"
LIN_NE = "int_lin_ne"
ALL_DIFFERENT = "all_different"

LINEAR_KINDS = (LIN_EQ, LIN_LE, LIN_NE)
CONSTRAINT_KINDS = LINEAR_KINDS + (ALL_DIFFERENT,)

BRUTE_FORCE_CAP = 10**7

PathId = tuple  # tuple of 0/1 branch choices from the root


class Sense(str, Enum):
    SATISFY = "satisfy"
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


class Mode(str, Enum):
    FIRST = "first"
    ALL = "all"
    OPTIMIZE = "opt"


class ModelError(ValueError):
    """A model (or an assignment handed to it) breaks a contract."""


@dataclass(frozen=True)
class VariableDecl:
    name: str
    domain: tuple[int, ...]

    @classmethod
    def interval(cls, name: str, lo: int, hi: int) -> "VariableDecl":
        return cls(name, tuple(range(lo, hi + 1)))

    @classmethod
    def of(cls, name: str, values: Iterable[int]) -> "VariableDecl":
        return cls(name, tuple(sorted(set(values))))


@dataclass(frozen=True)
class Constraint:
    """One constraint over named variables.

    Linear kinds read ``sum(coeffs[i] * vars[i]) <op> rhs``; ``all_different``
    only uses ``vars``.
    """

    kind: str
    vars: tuple[str, ...]
    coeffs: Optional[tuple[int, ...]] = None
    rhs: Optional[int] = None

    @classmethod
    def lin_eq(cls, coeffs: Sequence[int], vars: Sequence[str], rhs: int) -> "Constraint":
        return cls(LIN_EQ, tuple(vars), tuple(coeffs), rhs)

    @classmethod
    def lin_le(cls, coeffs: Sequence[int], vars: Sequence[str], rhs: int) -> "Constraint":
        return cls(LIN_LE, tuple(vars), tuple(coeffs), rhs)

    @classmethod
    def lin_ne(cls, coeffs: Sequence[int], vars: Sequence[str], rhs: int) -> "Constraint":
        return cls(LIN_NE, tuple(vars), tuple(coeffs), rhs)

    @classmethod
    def all_different(cls, vars: Sequence[str]) -> "Constraint":
        return cls(ALL_DIFFERENT, tuple(vars))

    def is_satisfied(self, values: Mapping[str, int]) -> bool:
        if self.kind == ALL_DIFFERENT:
            vals = [values[v] for v in self.vars]
            return len(set(vals)) == len(vals)
        total = sum(c * values[v] for c, v in zip(self.coeffs, self.vars))
        if self.kind == LIN_EQ:
            return total == self.rhs
        if self.kind == LIN_LE:
            return total <= self.rhs
        return total != self.rhs


@dataclass(frozen=True)
class Objective:
    sense: Sense = Sense.SATISFY
    var: Optional[str] = None

    @classmethod
    def minimize(cls, var: str) -> "Objective":
        return cls(Sense.MINIMIZE, var)

    @classmethod
    def maximize(cls, var: str) -> "Objective":
        return cls(Sense.MAXIMIZE, var)


SATISFY = Objective()


@dataclass(frozen=True)
class Model:
    vars: tuple[VariableDecl, ...]
    constraints: tuple[Constraint, ...] = ()
    objective: Objective = SATISFY
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "_index", {d.name: i for i, d in enumerate(self.vars)})

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.vars]

    def index_of(self, name: str) -> int:
        return self._index[name]

    @property
    def is_optimization(self) -> bool:
        return self.objective.sense is not Sense.SATISFY

    def search_space_size(self) -> int:
        return math.prod(len(d.domain) for d in self.vars)


@dataclass(frozen=True)
class Diagnostic:
    message: str
    var: Optional[int] = None         # index into Model.vars
    constraint: Optional[int] = None  # index into Model.constraints
    objective: bool = False

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class SolutionRecord:
    """A solution leaf: full assignment, objective value and its path."""

    assignment: dict
    objective: Optional[int] = None
    path: Optional[PathId] = None

    def values(self, names: Sequence[str]) -> list[int]:
        return [self.assignment[n] for n in names]

    def path_string(self) -> str:
        return "".join(str(b) for b in (self.path or ()))


def validate_model(m: Model) -> list[Diagnostic]:
    """Return every invariant violation of ``m``; an empty list means valid."""
    diags: list[Diagnostic] = []
    seen: set[str] = set()
    for i, decl in enumerate(m.vars):
        if decl.name in seen:
            diags.append(Diagnostic(f"duplicate variable {decl.name}", var=i))
        seen.add(decl.name)
        if not decl.domain:
            diags.append(Diagnostic(f"empty domain for variable {decl.name}", var=i))
        elif list(decl.domain) != sorted(set(decl.domain)):
            diags.append(Diagnostic(f"domain of {decl.name} is not a sorted set", var=i))
    for j, c in enumerate(m.constraints):
        if c.kind not in CONSTRAINT_KINDS:
            diags.append(Diagnostic(f"unknown constraint kind {c.kind}", constraint=j))
            continue
        if not c.vars:
            diags.append(Diagnostic(f"{c.kind} needs at least one variable", constraint=j))
        if c.kind in LINEAR_KINDS:
            if c.coeffs is None or c.rhs is None:
                diags.append(Diagnostic(f"{c.kind} needs coefficients and a right-hand side", constraint=j))
            elif len(c.coeffs) != len(c.vars):
                diags.append(Diagnostic(
                    f"arity mismatch in {c.kind}: {len(c.coeffs)} coefficients, {len(c.vars)} variables",
                    constraint=j))
        for name in c.vars:
            if name not in m._index:
                diags.append(Diagnostic(f"unknown variable {name}", constraint=j))
    obj = m.objective
    if obj.sense is Sense.SATISFY:
        if obj.var is not None:
            diags.append(Diagnostic("satisfy objective must not name a variable", objective=True))
    elif obj.var not in m._index:
        diags.append(Diagnostic(f"unknown variable {obj.var}", objective=True))
    return diags


def check_assignment(m: Model, a: Mapping[str, int]) -> bool:
    """True iff the complete assignment ``a`` satisfies every constraint of ``m``."""
    missing = [d.name for d in m.vars if d.name not in a]
    if missing:
        raise ModelError(f"incomplete assignment, missing {', '.join(missing)}")
    return all(c.is_satisfied(a) for c in m.constraints)


def _better(sense: Sense, value: int, incumbent: Optional[int]) -> bool:
    if incumbent is None:
        return True
    if sense is Sense.MINIMIZE:
        return value < incumbent
    return value > incumbent


def brute_force_solve(m: Model, mode: Mode = Mode.FIRST, cap: int = BRUTE_FORCE_CAP) -> list[SolutionRecord]:
    """Enumerate every assignment in lexicographic order (test oracle).

    ``First`` returns the lexicographically first feasible assignment,
    ``All`` every feasible one in order, ``Optimize`` the lexicographically
    first among those with the best objective value.
    """
    mode = Mode(mode)
    size = m.search_space_size()
    if size > cap:
        raise ModelError(f"search space {size} exceeds brute-force cap {cap}")
    names = m.names
    obj = m.objective
    found: list[SolutionRecord] = []
    best: Optional[SolutionRecord] = None
    for values in itertools.product(*(d.domain for d in m.vars)):
        a = dict(zip(names, values))
        if not check_assignment(m, a):
            continue
        value = a[obj.var] if obj.var is not None else None
        rec = SolutionRecord(a, value)
        if mode is Mode.FIRST:
            return [rec]
        if mode is Mode.ALL:
            found.append(rec)
        elif obj.sense is Sense.SATISFY:
            return [rec]
        elif best is None or _better(obj.sense, value, best.objective):
            best = rec
    if mode is Mode.OPTIMIZE:
        return [best] if best is not None else []
    return found
