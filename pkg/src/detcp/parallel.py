"""Parallel tree search with dynamic partitioning over a global priority queue.

An active worker that sees an idle one detaches a pending right branch of
its current path as a :class:`BobNode` (just the path to that right child)
and pushes it on the shared queue; the worker that pops it rebuilds the
node by replaying the path from the root.

Two split rules are provided.  ``SPD`` detaches the deepest pending right
branch and keeps the leftmost-solution cells below, which makes the result
identical to :func:`detcp.search.solve_seq` whatever the number of workers
or the thread schedule.  ``SPDA`` detaches the shallowest one (fewer
replayed nodes) and simply keeps the first solution found, so its
first-solution answer depends on timing.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import sys
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence, Union

from .model import Mode, Model, PathId, Sense, SolutionRecord
from .search import (
    DfsState,
    Order,
    SearchProblem,
    as_problem,
    compare_paths,
    effective_mode,
    objective_cap,
)

log = logging.getLogger(__name__)

THRESHOLD_CAP = 2**16


class Strategy(str, Enum):
    SPD = "spd"
    SPDA = "spda"


class CellKind(str, Enum):
    SPG = "spg"          # leftmost solution
    SOPG = "sopg"        # leftmost optimal solution
    FIRST = "first"      # first found / strictly better only (SPDA baseline)


class Update(str, Enum):
    UPDATED = "updated"
    REJECTED = "rejected"


@dataclass(frozen=True)
class BobNode:
    """A detached right subtree, addressed by its path from the root."""

    path: PathId
    seq: int = 0
    producer: int = 0

    def __post_init__(self):
        path = tuple(self.path)
        if not path or path[-1] != 1:
            raise ValueError(f"BobNode path must be non-empty and end on a right branch: {path}")
        object.__setattr__(self, "path", path)


class GlobalPriorityQueue:
    """BobNodes waiting for a worker, leftmost path first.

    Python tuple ordering over 0/1 tuples is exactly DFS preorder (a prefix
    sorts before its extensions), so paths are used directly as heap keys.
    """

    def __init__(self, nodes: Iterable[BobNode] = ()):
        self._heap: list[tuple[PathId, int, BobNode]] = []
        self._live: set[PathId] = set()
        for node in nodes:
            self.push(node)

    def __len__(self) -> int:
        return len(self._heap)

    def __iter__(self) -> Iterator[BobNode]:
        return (entry[2] for entry in sorted(self._heap))

    def push(self, node: BobNode) -> None:
        if node.path in self._live:
            raise ValueError(f"a live entry already has path {node.path}")
        self._live.add(node.path)
        heapq.heappush(self._heap, (node.path, node.seq, node))

    def peek(self) -> Optional[BobNode]:
        return self._heap[0][2] if self._heap else None

    def pop(self) -> Optional[BobNode]:
        if not self._heap:
            return None
        node = heapq.heappop(self._heap)[2]
        self._live.discard(node.path)
        return node

    def purge_right_of(self, frontier: Sequence[int]) -> list[BobNode]:
        kept, purged = [], []
        for entry in self._heap:
            (purged if compare_paths(entry[0], frontier) is Order.RIGHT else kept).append(entry)
        if purged:
            heapq.heapify(kept)
            self._heap = kept
            for entry in purged:
                self._live.discard(entry[0])
        return [entry[2] for entry in purged]

    def clear(self) -> None:
        self._heap.clear()
        self._live.clear()


class LeftmostCell:
    """Shared solution slot with compare-and-update under a lock.

    ``history`` records every installed candidate, in order, for auditing
    the monotonicity of a run.
    """

    def __init__(self, kind: CellKind, sense: Sense = Sense.SATISFY):
        self.kind = CellKind(kind)
        self.sense = Sense(sense)
        self.current: Optional[SolutionRecord] = None
        self.history: list[SolutionRecord] = []
        self._lock = threading.Lock()

    def _accepts(self, cand: SolutionRecord) -> bool:
        cur = self.current
        if cur is None:
            return True
        if self.kind is CellKind.SPG:
            return compare_paths(cand.path, cur.path) is Order.LEFT
        if self.sense is Sense.SATISFY:
            better = False
            equal = True
        elif self.sense is Sense.MINIMIZE:
            better, equal = cand.objective < cur.objective, cand.objective == cur.objective
        else:
            better, equal = cand.objective > cur.objective, cand.objective == cur.objective
        if self.kind is CellKind.FIRST:
            return better
        return better or (equal and compare_paths(cand.path, cur.path) is Order.LEFT)

    def offer(self, cand: SolutionRecord) -> Update:
        with self._lock:
            if not self._accepts(cand):
                return Update.REJECTED
            self.current = cand
            self.history.append(cand)
            return Update.UPDATED


def try_update_spg(cell: LeftmostCell, cand: SolutionRecord) -> Update:
    """Install ``cand`` if the cell is empty or ``cand`` lies strictly left of it."""
    if cell.kind is not CellKind.SPG:
        raise ValueError("try_update_spg needs an SPG cell")
    return cell.offer(cand)


def try_update_sopg(cell: LeftmostCell, cand: SolutionRecord) -> Update:
    """Install ``cand`` if its objective is strictly better, or equal and more to the left."""
    if cell.kind is not CellKind.SOPG:
        raise ValueError("try_update_sopg needs an SOPG cell")
    return cell.offer(cand)


@dataclass
class ThresholdState:
    """Global split budget ``S`` and per-worker splits since the last consumed BobNode."""

    S: int = 4
    cap: int = THRESHOLD_CAP
    produced: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.S < 1:
            raise ValueError("partitioning threshold must be positive")

    def P(self, worker: int) -> int:
        return self.produced.get(worker, 0)

    def can_split(self, worker: int) -> bool:
        return self.produced.get(worker, 0) < self.S

    def record_split(self, worker: int) -> None:
        self.produced[worker] = self.produced.get(worker, 0) + 1

    def reset(self, worker: int) -> None:
        self.produced[worker] = 0


def adjust_threshold(ts: ThresholdState, imbalance: bool) -> ThresholdState:
    """Double ``S`` (up to the cap) when a load imbalance was detected."""
    if imbalance:
        ts.S = min(ts.S * 2, ts.cap)
    return ts


@dataclass
class WorkerStats:
    worker: int
    nodes_expanded: int = 0
    nodes_replayed: int = 0
    splits_produced: int = 0
    bobnodes_consumed: int = 0
    solutions_found: int = 0
    work_ns: int = 0
    wait_ns: int = 0
    max_depth: int = 0

    CSV_FIELDS = ("worker", "nodes_expanded", "nodes_replayed", "splits_produced",
                  "bobnodes_consumed", "solutions_found", "work_ns", "wait_ns")

    def row(self) -> list[int]:
        return [getattr(self, f) for f in self.CSV_FIELDS]


def split_lowest_right(dfs: DfsState, seq: int = 0, producer: int = 0) -> Optional[BobNode]:
    """Detach the deepest pending right branch on the current path (SPD rule)."""
    depths = dfs.pending_depths()
    if not depths:
        return None
    return BobNode(dfs.detach_right(depths[-1]), seq, producer)


def split_highest_right(dfs: DfsState, seq: int = 0, producer: int = 0) -> Optional[BobNode]:
    """Detach the shallowest pending right branch on the current path (SPDA rule)."""
    depths = dfs.pending_depths()
    if not depths:
        return None
    return BobNode(dfs.detach_right(depths[0]), seq, producer)


SPLIT_RULES = {Strategy.SPD: split_lowest_right, Strategy.SPDA: split_highest_right}


def _no_bound(path) -> None:
    return None


def replay(problem: Union[Model, SearchProblem], path: Sequence[int],
           stats: Optional[WorkerStats] = None, bound_for=None) -> Optional[DfsState]:
    """Rebuild the node at ``path`` by re-applying every decision from the root.

    The root and the intermediate nodes (``len(path)`` nodes) are counted as
    replayed; the target node itself counts as an ordinary expansion.
    Returns None when some step turns out infeasible: the subtree then holds
    no work.
    """
    problem = as_problem(problem)
    stats = stats if stats is not None else WorkerStats(-1)
    bound_for = bound_for or _no_bound
    path = tuple(path)
    k = len(path)

    def visit(depth: int) -> None:
        stats.nodes_expanded += 1
        if depth < k:
            stats.nodes_replayed += 1
        if depth > stats.max_depth:
            stats.max_depth = depth

    state = problem.root()
    visit(0)
    if state is None:
        return None
    for i, side in enumerate(path):
        decision = problem.branch(state)
        if decision is None:
            raise ValueError(f"path {path} runs past a leaf at depth {i}")
        ok = problem.apply(state, decision, side, bound_for(path[:i + 1]))
        visit(i + 1)
        if not ok:
            return None
    return DfsState(problem, state, path)


class WorkerState(str, Enum):
    WAITING = "waiting"
    ACTIVE = "active"


@dataclass
class WorkerSlot:
    """Shared view of one worker: what it explores and whether it must stop."""

    id: int
    state: WorkerState = WorkerState.WAITING
    root: Optional[PathId] = None
    cancel: bool = False


def cancel_right_of(frontier: Sequence[int], workers: Sequence[WorkerSlot],
                    gpq: Optional[GlobalPriorityQueue] = None) -> int:
    """Flag active workers whose subtree lies right of ``frontier``; drop queued work there too."""
    count = 0
    for slot in workers:
        if (slot.state is WorkerState.ACTIVE and slot.root is not None and not slot.cancel
                and compare_paths(slot.root, frontier) is Order.RIGHT):
            slot.cancel = True
            count += 1
    if gpq is not None:
        gpq.purge_right_of(frontier)
    return count


def termination_detect(gpq: GlobalPriorityQueue, worker_states: Iterable[WorkerState],
                       in_flight: int = 0) -> bool:
    """True iff nothing is queued, nothing is being queued and every worker waits."""
    return (len(gpq) == 0 and in_flight == 0
            and all(WorkerState(s) is WorkerState.WAITING for s in worker_states))


def maybe_split(dfs: DfsState, waiting: int, threshold: ThresholdState, strategy: Strategy,
                gpq: GlobalPriorityQueue, worker: int = 0, seq: int = 0) -> bool:
    """Detach one right branch into ``gpq`` if a worker is idle and the budget allows it."""
    if waiting < 1 or not threshold.can_split(worker):
        return False
    node = SPLIT_RULES[Strategy(strategy)](dfs, seq, worker)
    if node is None:
        return False
    gpq.push(node)
    threshold.record_split(worker)
    return True


@dataclass
class EngineConfig:
    threshold: int = 4
    imbalance_ms: float = 10.0
    threshold_cap: int = THRESHOLD_CAP
    # GIL hand-over period while workers run; None keeps the interpreter's value
    switch_interval: Optional[float] = 2e-5


@dataclass
class ParallelResult:
    solutions: list[SolutionRecord]
    stats: list[WorkerStats]
    mode: Mode
    strategy: Strategy
    cell_history: list[SolutionRecord] = field(default_factory=list)
    pop_log: list[PathId] = field(default_factory=list)
    final_threshold: int = 0
    wall_ns: int = 0

    @property
    def solution(self) -> Optional[SolutionRecord]:
        return self.solutions[0] if self.solutions else None

    @property
    def max_depth(self) -> int:
        return max((s.max_depth for s in self.stats), default=0)

    def total(self, attr: str) -> int:
        return sum(getattr(s, attr) for s in self.stats)


_ROOT = object()


class _Engine:
    def __init__(self, problem: SearchProblem, n_workers: int, strategy: Strategy,
                 mode: Mode, cfg: EngineConfig):
        self.problem = problem
        self.n = n_workers
        self.strategy = strategy
        self.mode = mode
        self.sense = problem.sense
        self.cfg = cfg
        self.cond = threading.Condition()
        self.gpq = GlobalPriorityQueue()
        self.slots = [WorkerSlot(i) for i in range(n_workers)]
        self.stats = [WorkerStats(i) for i in range(n_workers)]
        self.threshold = ThresholdState(cfg.threshold, cfg.threshold_cap)
        self.split = SPLIT_RULES[strategy]
        self.waiting = 0
        self.in_flight = 0
        self.done = False
        self.error: Optional[BaseException] = None
        self.seq = itertools.count(1)
        self.pop_log: list[PathId] = []
        self.found: list[list[SolutionRecord]] = [[] for _ in range(n_workers)]
        if strategy is Strategy.SPDA:
            kind = CellKind.FIRST
        else:
            kind = CellKind.SOPG if mode is Mode.OPTIMIZE else CellKind.SPG
        self.cell = LeftmostCell(kind, self.sense)
        # snapshots read lock-free by workers
        self.frontier: Optional[PathId] = None
        self.incumbent: Optional[tuple[int, PathId]] = None
        self.stop_all = False
        # nobody searches before every thread is up, or worker 0 gets a head
        # start while the others are still being created
        self.start_gate = threading.Barrier(n_workers)
        # worker 0 owns the root from the start
        self.slots[0].state = WorkerState.ACTIVE
        self.slots[0].root = ()

    # -- bounds ---------------------------------------------------------

    def bound_for(self, path) -> Optional[int]:
        inc = self.incumbent
        if inc is None:
            return None
        if self.strategy is Strategy.SPDA:
            # first-found semantics: only strictly better solutions matter
            return inc[0] - 1 if self.sense is Sense.MINIMIZE else inc[0] + 1
        return objective_cap(self.sense, inc, path)

    # -- queue side -----------------------------------------------------

    def _pop_live(self) -> Optional[BobNode]:
        while True:
            node = self.gpq.pop()
            if node is None:
                return None
            frontier = self.frontier
            if frontier is not None and compare_paths(node.path, frontier) is Order.RIGHT:
                continue
            if self.stop_all:
                continue
            self.pop_log.append(node.path)
            return node

    def acquire(self, wid: int) -> Optional[BobNode]:
        slot, stats = self.slots[wid], self.stats[wid]
        window = self.cfg.imbalance_ms / 1000.0
        t0 = time.perf_counter_ns()
        with self.cond:
            slot.state = WorkerState.WAITING
            slot.root = None
            self.waiting += 1
            since = time.monotonic()
            try:
                while True:
                    if self.done:
                        return None
                    node = self._pop_live()
                    if node is not None:
                        slot.state = WorkerState.ACTIVE
                        slot.root = node.path
                        slot.cancel = False
                        self.threshold.reset(wid)
                        return node
                    if termination_detect(self.gpq, (s.state for s in self.slots), self.in_flight):
                        self.done = True
                        self.cond.notify_all()
                        return None
                    self.cond.wait(window)
                    now = time.monotonic()
                    if now - since >= window:
                        active = self.n - self.waiting
                        imbalance = len(self.gpq) == 0 and active >= 1
                        if imbalance:
                            adjust_threshold(self.threshold, True)
                        since = now
            finally:
                self.waiting -= 1
                stats.wait_ns += time.perf_counter_ns() - t0

    def maybe_split(self, wid: int, dfs: DfsState) -> bool:
        # idle workers not already covered by queued work
        if self.waiting - len(self.gpq) < 1 or not self.threshold.can_split(wid):
            return False
        depths = dfs.pending_depths()
        if not depths:
            return False
        if self.frontier is not None:
            target = depths[-1] if self.strategy is Strategy.SPD else depths[0]
            right_child = tuple(dfs.path[:target - 1]) + (1,)
            if compare_paths(right_child, self.frontier) is Order.RIGHT:
                return False
        with self.cond:
            self.in_flight += 1
        node = self.split(dfs, next(self.seq), wid)
        with self.cond:
            self.gpq.push(node)
            self.in_flight -= 1
            self.threshold.record_split(wid)
            self.cond.notify()
        self.stats[wid].splits_produced += 1
        time.sleep(0)  # let the idle worker pick the node up now
        return True

    # -- solutions ------------------------------------------------------

    def on_solution(self, wid: int, rec: SolutionRecord) -> bool:
        """Record a solution; return True when this worker should stop its subtree."""
        self.stats[wid].solutions_found += 1
        if self.mode is Mode.ALL:
            self.found[wid].append(rec)
            return False
        if self.strategy is Strategy.SPDA:
            with self.cond:
                if self.cell.offer(rec) is Update.UPDATED:
                    if self.mode is Mode.FIRST:
                        self.stop_all = True
                        for slot in self.slots:
                            slot.cancel = True
                        self.gpq.clear()
                    else:
                        self.incumbent = (rec.objective, rec.path)
            return self.mode is Mode.FIRST
        if self.mode is Mode.FIRST:
            with self.cond:
                if try_update_spg(self.cell, rec) is Update.UPDATED:
                    self.frontier = rec.path
                    cancel_right_of(rec.path, self.slots, self.gpq)
            return True
        with self.cond:
            if try_update_sopg(self.cell, rec) is Update.UPDATED:
                self.incumbent = (rec.objective, rec.path)
        return False

    # -- exploration ----------------------------------------------------

    def should_stop(self, slot: WorkerSlot, path) -> bool:
        if slot.cancel or self.done or self.stop_all:
            return True
        frontier = self.frontier
        # everything after this node in DFS order lies right of it as well
        return frontier is not None and compare_paths(path, frontier) is Order.RIGHT

    def explore(self, wid: int, job) -> None:
        problem, stats, slot = self.problem, self.stats[wid], self.slots[wid]
        bound_for = self.bound_for
        if job is _ROOT:
            state = problem.root()
            stats.nodes_expanded += 1
            if state is None:
                return
            dfs = DfsState(problem, state)
        else:
            stats.bobnodes_consumed += 1
            if self.should_stop(slot, job.path):
                return
            dfs = replay(problem, job.path, stats, bound_for)
            if dfs is None:
                return
        state = dfs.state
        ok = True
        while True:
            if ok:
                if self.should_stop(slot, dfs.path):
                    return
                decision = problem.branch(state)
                if decision is not None:
                    self.maybe_split(wid, dfs)
                    dfs.open(decision)
                    ok = dfs.descend_left(bound_for)
                    stats.nodes_expanded += 1
                    if dfs.depth > stats.max_depth:
                        stats.max_depth = dfs.depth
                    continue
                if problem.is_solution(state):
                    rec = SolutionRecord(problem.assignment(state), problem.objective(state),
                                         dfs.record_path())
                    if self.on_solution(wid, rec):
                        return
            ok = dfs.next_sibling(bound_for)
            if ok is None:
                return
            stats.nodes_expanded += 1
            if dfs.depth > stats.max_depth:
                stats.max_depth = dfs.depth

    def run_worker(self, wid: int) -> None:
        stats = self.stats[wid]
        job = _ROOT if wid == 0 else None
        try:
            self.start_gate.wait()
            while True:
                if job is None:
                    job = self.acquire(wid)
                    if job is None:
                        return
                t0 = time.perf_counter_ns()
                try:
                    self.explore(wid, job)
                finally:
                    stats.work_ns += time.perf_counter_ns() - t0
                job = None
        except BaseException as exc:  # surfaced by solve_par
            with self.cond:
                if self.error is None:
                    self.error = exc
                self.done = True
                self.cond.notify_all()

    def results(self) -> list[SolutionRecord]:
        if self.mode is Mode.ALL:
            # a worker's jobs are not popped in path order, so sort the union
            return sorted(itertools.chain.from_iterable(self.found), key=lambda r: r.path)
        return [self.cell.current] if self.cell.current is not None else []


def solve_par(problem: Union[Model, SearchProblem], n_workers: int = 4,
              strategy: Union[Strategy, str] = Strategy.SPD,
              mode: Union[Mode, str] = Mode.FIRST,
              cfg: Optional[EngineConfig] = None) -> ParallelResult:
    """Search with ``n_workers`` threads sharing one global priority queue.

    With ``Strategy.SPD`` the returned solution(s) equal those of
    ``solve_seq(problem, mode)``: the leftmost solution for ``first``, the
    leftmost among the best for ``opt``, all of them in path order for
    ``all``.
    """
    if n_workers < 1:
        raise ValueError("need at least one worker")
    problem = as_problem(problem)
    strategy = Strategy(strategy)
    mode = effective_mode(mode, problem.sense)
    cfg = cfg or EngineConfig()
    engine = _Engine(problem, n_workers, strategy, mode, cfg)
    threads = [threading.Thread(target=engine.run_worker, args=(i,), name=f"detcp-worker-{i}", daemon=True)
               for i in range(n_workers)]
    previous = sys.getswitchinterval()
    if cfg.switch_interval is not None:
        sys.setswitchinterval(cfg.switch_interval)
    try:
        t0 = time.perf_counter_ns()
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        wall = time.perf_counter_ns() - t0
    finally:
        sys.setswitchinterval(previous)
    if engine.error is not None:
        raise engine.error
    log.debug("solve_par %s/%s with %d workers: final S=%d", strategy.value, mode.value,
              n_workers, engine.threshold.S)
    return ParallelResult(
        solutions=engine.results(),
        stats=engine.stats,
        mode=mode,
        strategy=strategy,
        cell_history=list(engine.cell.history),
        pop_log=engine.pop_log,
        final_threshold=engine.threshold.S,
        wall_ns=wall,
    )
