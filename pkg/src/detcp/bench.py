"""Single runs, run reports, statistics CSV and the benchmark matrix."""

from __future__ import annotations

import csv
import json
import logging
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .model import Mode, Model, SolutionRecord
from .parallel import EngineConfig, Strategy, WorkerStats, solve_par
from .search import SearchProblem, as_problem, effective_mode, solve_seq

log = logging.getLogger(__name__)

SEQ = "seq"

BENCH_FIELDS = (
    "model", "mode", "strategy", "workers", "reps",
    "wall_ns_mean", "wall_ns_min", "wall_ns_max", "seq_wall_ns_mean", "speedup",
    "nodes_expanded_mean", "nodes_replayed_mean", "distinct_solutions",
    "status", "solution_count", "objective", "assignment", "path",
)


class DeterminismError(RuntimeError):
    """An SPD run returned something other than the sequential result."""


def status_of(solutions: Sequence[SolutionRecord], mode: Mode) -> str:
    if not solutions:
        return "UNSAT"
    return "OPTIMAL" if mode is Mode.OPTIMIZE else "SAT"


def solution_line(rec: Optional[SolutionRecord], mode: Mode) -> str:
    """``status;objective;var=val,...;path`` with empty fields when there is no solution."""
    if rec is None:
        return "UNSAT;;;"
    obj = "" if rec.objective is None else str(rec.objective)
    values = ",".join(f"{k}={v}" for k, v in rec.assignment.items())
    return f"{status_of([rec], mode)};{obj};{values};{rec.path_string()}"


@dataclass
class RunOutcome:
    solutions: list[SolutionRecord]
    stats: list[WorkerStats]
    wall_ns: int
    mode: Mode
    strategy: str
    workers: int


def run(problem: Union[Model, SearchProblem], mode: Union[Mode, str] = Mode.FIRST,
        strategy: str = "spd", workers: int = 4, cfg: Optional[EngineConfig] = None) -> RunOutcome:
    """Run either the sequential search (``strategy='seq'``) or the parallel engine."""
    problem = as_problem(problem)
    mode = effective_mode(mode, problem.sense)
    if strategy == SEQ:
        t0 = time.perf_counter_ns()
        res = solve_seq(problem, mode)
        wall = time.perf_counter_ns() - t0
        ws = WorkerStats(0, nodes_expanded=res.stats.nodes_expanded,
                         solutions_found=res.stats.solutions_found, work_ns=wall,
                         max_depth=res.stats.max_depth)
        return RunOutcome(res.solutions, [ws], wall, mode, SEQ, 1)
    res = solve_par(problem, workers, Strategy(strategy), mode, cfg)
    return RunOutcome(res.solutions, res.stats, res.wall_ns, mode, Strategy(strategy).value, workers)


@dataclass
class RunReport:
    model: str
    mode: str
    strategy: str
    workers: int
    status: str
    solution: Optional[dict]
    solution_count: int
    wall_ns: int
    worker_stats: list[dict] = field(default_factory=list)
    seq_wall_ns: Optional[int] = None
    speedup: Optional[float] = None

    @classmethod
    def from_outcome(cls, model_id: str, out: RunOutcome, seq_wall_ns: Optional[int] = None) -> "RunReport":
        first = out.solutions[0] if out.solutions else None
        sol = None
        if first is not None:
            sol = {"assignment": dict(first.assignment), "objective": first.objective,
                   "path": first.path_string()}
        speedup = seq_wall_ns / out.wall_ns if seq_wall_ns and out.wall_ns else None
        return cls(model_id, out.mode.value, out.strategy, out.workers, status_of(out.solutions, out.mode),
                   sol, len(out.solutions), out.wall_ns,
                   [{k: v for k, v in asdict(s).items() if k in WorkerStats.CSV_FIELDS} for s in out.stats],
                   seq_wall_ns, speedup)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=False)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def write_stats_csv(path: Union[str, Path], stats: Iterable[WorkerStats]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(WorkerStats.CSV_FIELDS)
        for s in stats:
            w.writerow(s.row())


@dataclass
class BenchRow:
    model: str
    mode: str
    strategy: str
    workers: int
    reps: int
    wall_ns_mean: float
    wall_ns_min: int
    wall_ns_max: int
    seq_wall_ns_mean: float
    speedup: float
    nodes_expanded_mean: float
    nodes_replayed_mean: float
    distinct_solutions: int
    status: str
    solution_count: int
    objective: str
    assignment: str
    path: str


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    runs: int = 0

    def write_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(BENCH_FIELDS)
            for r in self.rows:
                w.writerow([getattr(r, f) for f in BENCH_FIELDS])


def solutions_key(solutions: Sequence[SolutionRecord]) -> tuple:
    return tuple((tuple(sorted(s.assignment.items())), s.objective, s.path) for s in solutions)


def _dump(solutions: Sequence[SolutionRecord]) -> str:
    return "\n".join(f"  {solution_line(s, Mode.FIRST)}" for s in solutions) or "  (none)"


def bench_matrix(models: Mapping[str, Union[Model, SearchProblem]], workers_list: Sequence[int],
                 strategies: Sequence[str], reps: int = 1,
                 modes: Sequence[Union[Mode, str]] = (Mode.FIRST,),
                 cfg: Optional[EngineConfig] = None) -> BenchReport:
    """Run every (model, mode, strategy, workers) cell ``reps`` times.

    Each cell is compared against a sequential baseline of the same model
    and mode; an SPD cell that disagrees raises :class:`DeterminismError`.
    Cells run one after the other so wall times stay comparable.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    report = BenchReport()
    for name, problem in models.items():
        problem = as_problem(problem)
        for mode in modes:
            mode = effective_mode(mode, problem.sense)
            seq_runs = [run(problem, mode, SEQ) for _ in range(reps)]
            reference = seq_runs[0].solutions
            seq_mean = statistics.fmean(r.wall_ns for r in seq_runs)
            for strategy in strategies:
                for workers in workers_list:
                    outs = [run(problem, mode, strategy, workers, cfg) for _ in range(reps)]
                    report.runs += reps
                    for out in outs:
                        if strategy in (SEQ, Strategy.SPD.value) and solutions_key(out.solutions) != solutions_key(reference):
                            raise DeterminismError(
                                f"{name} {mode.value} {strategy} x{workers}: result differs from sequential\n"
                                f"sequential:\n{_dump(reference)}\nparallel:\n{_dump(out.solutions)}")
                    walls = [o.wall_ns for o in outs]
                    mean = statistics.fmean(walls)
                    first = outs[0].solutions[0] if outs[0].solutions else None
                    report.rows.append(BenchRow(
                        model=name, mode=mode.value, strategy=strategy, workers=workers, reps=reps,
                        wall_ns_mean=round(mean), wall_ns_min=min(walls), wall_ns_max=max(walls),
                        seq_wall_ns_mean=round(seq_mean), speedup=round(seq_mean / mean, 4) if mean else 0.0,
                        nodes_expanded_mean=round(statistics.fmean(sum(s.nodes_expanded for s in o.stats) for o in outs), 2),
                        nodes_replayed_mean=round(statistics.fmean(sum(s.nodes_replayed for s in o.stats) for o in outs), 2),
                        distinct_solutions=len({solutions_key(o.solutions) for o in outs}),
                        status=status_of(outs[0].solutions, mode),
                        solution_count=len(outs[0].solutions),
                        objective="" if first is None or first.objective is None else str(first.objective),
                        assignment="" if first is None else ",".join(f"{k}={v}" for k, v in first.assignment.items()),
                        path="" if first is None else first.path_string(),
                    ))
                    log.info("%s %s %s x%d: mean %.3f ms", name, mode.value, strategy, workers, mean / 1e6)
    return report
