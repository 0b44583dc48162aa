"""Worker-local domain store with a trail, and fixpoint propagation.

Filters are deliberately weak: bounds reasoning for ``int_lin_le`` and
``int_lin_eq``, forbidden-value removal for ``int_lin_ne`` once a single
variable is left, and value elimination for ``all_different``.  All of them
are monotone, so the fixpoint does not depend on the order the queue runs
them in.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Optional, Union

from .model import ALL_DIFFERENT, LIN_EQ, LIN_LE, LIN_NE, Constraint, Model, ModelError, Sense

_KIND_LE, _KIND_EQ, _KIND_NE, _KIND_ALLDIFF = range(4)
_KIND_CODES = {LIN_LE: _KIND_LE, LIN_EQ: _KIND_EQ, LIN_NE: _KIND_NE, ALL_DIFFERENT: _KIND_ALLDIFF}


class Polarity(IntEnum):
    ASSIGN = 0   # left child, var = value
    EXCLUDE = 1  # right child, var != value


@dataclass(frozen=True)
class Decision:
    var: int
    value: int
    polarity: Polarity = Polarity.ASSIGN

    def negated(self) -> "Decision":
        return Decision(self.var, self.value, Polarity(1 - self.polarity))


class CompiledModel:
    """Index-based view of a :class:`Model` shared read-only by all workers."""

    def __init__(self, model: Model):
        self.model = model
        self.names = model.names
        self.initial = [d.domain for d in model.vars]
        self.constraints = []
        self.watchers: list[list[int]] = [[] for _ in model.vars]
        for ci, c in enumerate(model.constraints):
            idx = tuple(model.index_of(v) for v in c.vars)
            self.constraints.append((_KIND_CODES[c.kind], idx, c.coeffs, c.rhs))
            for v in set(idx):
                self.watchers[v].append(ci)
        self.sense = model.objective.sense
        self.objective = (model.index_of(model.objective.var)
                          if model.objective.var is not None else None)


class DomainStore:
    """Per-variable sorted value tuples plus an undo trail split into levels."""

    __slots__ = ("model", "domains", "trail", "levels")

    def __init__(self, model: Union[Model, CompiledModel]):
        if isinstance(model, Model):
            model = CompiledModel(model)
        self.model = model
        self.domains: list[tuple[int, ...]] = list(model.initial)
        self.trail: list[tuple[int, tuple[int, ...]]] = []
        self.levels: list[int] = []

    def __eq__(self, other) -> bool:
        if not isinstance(other, DomainStore):
            return NotImplemented
        return (self.domains == other.domains and self.trail == other.trail
                and self.levels == other.levels)

    def __repr__(self) -> str:
        doms = ", ".join(f"{n}={list(d)}" for n, d in zip(self.model.names, self.domains))
        return f"DomainStore(level={len(self.levels)}, {doms})"

    @property
    def level(self) -> int:
        return len(self.levels)

    def snapshot(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.domains)

    def is_fixed(self, var: int) -> bool:
        return len(self.domains[var]) == 1

    def all_fixed(self) -> bool:
        return all(len(d) == 1 for d in self.domains)

    def value(self, var: int) -> int:
        return self.domains[var][0]

    def assignment(self) -> dict[str, int]:
        return {n: d[0] for n, d in zip(self.model.names, self.domains)}

    def set_domain(self, var: int, values: tuple[int, ...]) -> None:
        self.trail.append((var, self.domains[var]))
        self.domains[var] = values

    def push_level(self) -> None:
        self.levels.append(len(self.trail))

    def pop_level(self) -> None:
        if not self.levels:
            raise ModelError("pop_decision on a store with no decision level")
        mark = self.levels.pop()
        trail, domains = self.trail, self.domains
        while len(trail) > mark:
            var, old = trail.pop()
            domains[var] = old


@dataclass(frozen=True)
class PropagationOutcome:
    """``failed`` is None for a stable store, else the index of the failing constraint."""

    failed: Optional[int] = None
    failed_constraint: Optional[Constraint] = None

    @property
    def stable(self) -> bool:
        return self.failed is None

    def __bool__(self) -> bool:
        return self.failed is None


STABLE = PropagationOutcome()

# sentinel for a failure that is not caused by a constraint (decision or bound)
_NO_CONSTRAINT = -1


def _filter_le(store: DomainStore, idx, coeffs, rhs, changed: list[int]) -> bool:
    doms = store.domains
    mins = []
    total = 0
    for a, v in zip(coeffs, idx):
        d = doms[v]
        m = a * d[0] if a >= 0 else a * d[-1]
        mins.append(m)
        total += m
    if total > rhs:
        return False
    for k, (a, v) in enumerate(zip(coeffs, idx)):
        if a == 0:
            continue
        slack = rhs - (total - mins[k])
        d = doms[v]
        if a > 0:
            ub = slack // a
            if d[-1] > ub:
                new = tuple(x for x in d if x <= ub)
                if not new:
                    return False
                store.set_domain(v, new)
                changed.append(v)
        else:
            lb = -(slack // -a)
            if d[0] < lb:
                new = tuple(x for x in d if x >= lb)
                if not new:
                    return False
                store.set_domain(v, new)
                changed.append(v)
    return True


def _filter_ne(store: DomainStore, idx, coeffs, rhs, changed: list[int]) -> bool:
    doms = store.domains
    open_k = -1
    total = 0
    for k, (a, v) in enumerate(zip(coeffs, idx)):
        d = doms[v]
        if len(d) == 1:
            total += a * d[0]
        elif open_k >= 0:
            return True  # two or more unfixed variables: nothing to do
        else:
            open_k = k
    if open_k < 0:
        return total != rhs
    a, v = coeffs[open_k], idx[open_k]
    rest = rhs - total
    if a == 0 or rest % a:
        return True
    bad = rest // a
    d = doms[v]
    if bad in d:
        new = tuple(x for x in d if x != bad)
        store.set_domain(v, new)  # len(d) >= 2, never empties
        changed.append(v)
    return True


def _filter_alldiff(store: DomainStore, idx, changed: list[int]) -> bool:
    doms = store.domains
    for i in idx:
        d = doms[i]
        if len(d) != 1:
            continue
        val = d[0]
        for j in idx:
            if j == i:
                continue
            dj = doms[j]
            if val in dj:
                new = tuple(x for x in dj if x != val)
                if not new:
                    return False
                store.set_domain(j, new)
                changed.append(j)
    return True


def _run_filter(store: DomainStore, con, changed: list[int]) -> bool:
    kind, idx, coeffs, rhs = con
    if kind == _KIND_LE:
        return _filter_le(store, idx, coeffs, rhs, changed)
    if kind == _KIND_EQ:
        return (_filter_le(store, idx, coeffs, rhs, changed)
                and _filter_le(store, idx, [-a for a in coeffs], -rhs, changed))
    if kind == _KIND_NE:
        return _filter_ne(store, idx, coeffs, rhs, changed)
    return _filter_alldiff(store, idx, changed)


def _fixpoint(store: DomainStore, seeds: Optional[Iterable[int]]) -> PropagationOutcome:
    cm = store.model
    cons = cm.constraints
    watchers = cm.watchers
    if seeds is None:
        queue = deque(range(len(cons)))
    else:
        queue = deque()
        for v in seeds:
            queue.extend(watchers[v])
        queue = deque(dict.fromkeys(queue))
    queued = set(queue)
    changed: list[int] = []
    while queue:
        ci = queue.popleft()
        queued.discard(ci)
        changed.clear()
        if not _run_filter(store, cons[ci], changed):
            return PropagationOutcome(ci, cm.model.constraints[ci])
        for v in changed:
            for cj in watchers[v]:
                if cj not in queued:
                    queued.add(cj)
                    queue.append(cj)
    return STABLE


def propagate(store: DomainStore, model: Optional[Model] = None) -> PropagationOutcome:
    """Run every filter of the store's model to a fixpoint.

    ``model`` must be the one the store was built from when given; it is
    accepted for symmetry with callers that hold the model and not the store.
    """
    if model is not None and model is not store.model.model and model != store.model.model:
        raise ModelError("store was built for a different model")
    if any(not d for d in store.domains):
        raise ModelError("propagate needs non-empty domains")
    return _fixpoint(store, None)


def _cap_objective(store: DomainStore, bound: int) -> bool:
    cm = store.model
    v = cm.objective
    d = store.domains[v]
    if cm.sense is Sense.MINIMIZE:
        if d[-1] <= bound:
            return True
        new = tuple(x for x in d if x <= bound)
    else:
        if d[0] >= bound:
            return True
        new = tuple(x for x in d if x >= bound)
    if not new:
        return False
    store.set_domain(v, new)
    return True


def push_decision(store: DomainStore, d: Decision, objective_cap: Optional[int] = None) -> PropagationOutcome:
    """Open a trail level, apply ``d`` and propagate.

    ``objective_cap`` additionally keeps the objective variable at or better
    than the given value on the same level (used for branch-and-bound).  A
    failure leaves the level in place; :func:`pop_decision` undoes it.
    """
    dom = store.domains[d.var]
    if d.value not in dom:
        raise ModelError(f"decision value {d.value} not in domain of {store.model.names[d.var]}")
    if d.polarity is Polarity.EXCLUDE and len(dom) < 2:
        raise ModelError(f"cannot exclude the last value of {store.model.names[d.var]}")
    store.push_level()
    if d.polarity is Polarity.ASSIGN:
        if len(dom) != 1:
            store.set_domain(d.var, (d.value,))
    else:
        store.set_domain(d.var, tuple(x for x in dom if x != d.value))
    seeds = [d.var]
    if objective_cap is not None and store.model.objective is not None:
        before = store.domains[store.model.objective]
        if not _cap_objective(store, objective_cap):
            return PropagationOutcome(_NO_CONSTRAINT)
        if store.domains[store.model.objective] is not before:
            seeds.append(store.model.objective)
    return _fixpoint(store, seeds)


def probe_objective_cap(store: DomainStore, cap: int) -> PropagationOutcome:
    """Would the store survive keeping the objective at or better than ``cap``?

    The restriction is propagated on a scratch level and undone, so the
    store comes back unchanged whatever the answer.
    """
    v = store.model.objective
    if v is None:
        return STABLE
    store.push_level()
    try:
        if not _cap_objective(store, cap):
            return PropagationOutcome(_NO_CONSTRAINT)
        return _fixpoint(store, [v])
    finally:
        store.pop_level()


def pop_decision(store: DomainStore) -> DomainStore:
    """Undo the most recent :func:`push_decision` exactly."""
    store.pop_level()
    return store
